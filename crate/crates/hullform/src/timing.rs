use std::time::Instant;

use hullform_core::optimize::{Evaluation, Evaluator, EvaluatorKind};
use hullform_core::DesignParams;

/// Wraps an evaluator and stamps each evaluation with its wall time.
#[derive(Debug, Clone)]
pub struct Timed<E> {
    pub inner: E,
}

impl<E: Evaluator> Evaluator for Timed<E> {
    fn kind(&self) -> EvaluatorKind {
        self.inner.kind()
    }

    fn objective_names(&self) -> Vec<String> {
        self.inner.objective_names()
    }

    fn evaluate(&mut self, params: &DesignParams) -> hullform_core::Result<Evaluation> {
        let start = Instant::now();
        let mut e = self.inner.evaluate(params)?;
        e.wall_time_s = start.elapsed().as_secs_f64();
        Ok(e)
    }
}
