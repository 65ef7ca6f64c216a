//! Binary model checkpoints and the loss-history CSV.

use std::fs;
use std::path::Path;

use hullform_core::surrogate::{ChannelStats, EpochRecord, FeatureScaling, Mlp, SurrogateModel, CHANNEL_COUNT};
use hullform_core::{DesignBounds, WaterConstants};

use crate::binfmt::{Reader, Writer};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"HFMODEL\0";
const VERSION: u32 = 1;

pub fn encode_model(model: &SurrogateModel) -> Vec<u8> {
    let mut w = Writer::default();
    w.bytes(MAGIC);
    w.u32(VERSION);
    let sizes = model.network.sizes();
    w.u32(sizes.len() as u32);
    for &s in sizes {
        w.u32(s as u32);
    }
    w.u64(model.network.params().len() as u64);
    w.f64s(model.network.params());
    w.f64s(&model.stats.mean);
    w.f64s(&model.stats.scale);
    w.f64(model.scaling.v_ref);
    w.f64s(&model.scaling.bounds.lower);
    w.f64s(&model.scaling.bounds.upper);
    let c = model.constants;
    w.f64s(&[c.rho, c.gravity, c.p_atm]);
    w.buf
}

pub fn decode_model(path: &Path, data: &[u8]) -> Result<SurrogateModel> {
    let mut r = Reader::new(path, data);
    r.expect(MAGIC, "model checkpoint")?;
    let version = r.u32()?;
    if version != VERSION {
        return Err(r.error(format!("unsupported checkpoint version {version}")));
    }
    let layers = r.u32()? as usize;
    if layers > 64 {
        return Err(r.error(format!("implausible layer count {layers}")));
    }
    let sizes = (0..layers).map(|_| r.u32().map(|s| s as usize)).collect::<Result<Vec<_>>>()?;
    let n = r.count(8)?;
    let params = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let mean = r.f64s::<CHANNEL_COUNT>()?;
    let scale = r.f64s::<CHANNEL_COUNT>()?;
    let v_ref = r.f64()?;
    let lower = r.f64s::<5>()?;
    let upper = r.f64s::<5>()?;
    let [rho, gravity, p_atm] = r.f64s::<3>()?;
    r.finish()?;
    let network = Mlp::from_parts(sizes, params)?;
    let scaling = FeatureScaling {
        v_ref,
        bounds: DesignBounds::new(lower, upper)?,
    };
    Ok(SurrogateModel::new(
        network,
        ChannelStats { mean, scale },
        scaling,
        WaterConstants { rho, gravity, p_atm },
    )?)
}

pub fn save_model(path: &Path, model: &SurrogateModel) -> Result<()> {
    fs::write(path, encode_model(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<SurrogateModel> {
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(path, &data)
}

pub fn write_history(path: &Path, history: &[EpochRecord]) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["epoch", "train_loss", "val_loss"]).map_err(csv_err)?;
    for h in history {
        let val = h.val_loss.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([h.epoch.to_string(), h.train_loss.to_string(), val]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_history(path: &Path) -> Result<Vec<EpochRecord>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut out = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row.map_err(csv_err)?;
        let bad = || Error::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            message: "expected epoch,train_loss,val_loss".into(),
        };
        let field = |k: usize| row.get(k).ok_or_else(bad);
        out.push(EpochRecord {
            epoch: field(0)?.parse().map_err(|_| bad())?,
            train_loss: field(1)?.parse().map_err(|_| bad())?,
            val_loss: match field(2)? {
                "" => None,
                v => Some(v.parse().map_err(|_| bad())?),
            },
        });
    }
    Ok(out)
}
