use hullform_core::doe::{sobol_generate, DIRECTION_TABLE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Rows of the published new-joe-kuo-6.21201 file for dimensions 2..=16.
const PUBLISHED: &str = "\
2 1 0 1
3 2 1 1 3
4 3 1 1 3 1
5 3 2 1 1 1
6 4 1 1 1 3 3
7 4 4 1 3 5 13
8 5 2 1 1 5 5 17
9 5 4 1 1 5 5 5
10 5 7 1 1 7 11 19
11 5 11 1 1 5 1 1
12 5 13 1 1 1 3 11
13 5 14 1 3 5 5 31
14 6 1 1 3 3 9 7 49
15 6 13 1 1 1 15 21 21
16 6 16 1 3 1 13 27 49";

fn checksum(rows: impl Iterator<Item = Vec<u32>>) -> u64 {
    rows.fold(0u64, |h, row| {
        row.iter().fold(h, |h, &x| h.wrapping_mul(1_000_003).wrapping_add(u64::from(x)))
    })
}

#[test]
fn embedded_table_matches_published_rows() {
    let published = PUBLISHED.lines().map(|l| {
        l.split_whitespace().skip(1).map(|t| t.parse().unwrap()).collect::<Vec<u32>>()
    });
    let embedded = DIRECTION_TABLE.iter().map(|(s, a, m)| {
        let mut row = vec![*s, *a];
        row.extend_from_slice(m);
        row
    });
    assert_eq!(checksum(embedded), checksum(published));
}

// Reference rows produced by an independent unscrambled Joe-Kuo generator,
// indexed from the origin.
#[test]
fn matches_reference_generator_in_all_sixteen_dimensions() {
    let pts = sobol_generate(16, 1024, 0).unwrap();
    let row4 = [0.375, 0.375, 0.625, 0.875, 0.375, 0.125, 0.375, 0.875, 0.875, 0.625, 0.875, 0.375, 0.375, 0.625, 0.375, 0.875];
    let row8 = [0.1875, 0.3125, 0.9375, 0.4375, 0.5625, 0.3125, 0.4375, 0.9375, 0.9375, 0.3125, 0.6875, 0.0625, 0.9375, 0.9375, 0.8125, 0.9375];
    let row31 = [0.03125, 0.53125, 0.90625, 0.96875, 0.96875, 0.78125, 0.34375, 0.53125, 0.15625, 0.59375, 0.03125, 0.34375, 0.96875, 0.21875, 0.65625, 0.84375];
    let row777 = [0.6923828125, 0.9365234375, 0.1630859375, 0.2744140625, 0.6357421875, 0.3564453125, 0.1904296875, 0.7626953125, 0.3486328125, 0.3232421875, 0.7451171875, 0.6962890625, 0.3837890625, 0.4736328125, 0.5693359375, 0.5146484375];
    let row1023 = [0.0009765625, 0.7529296875, 0.6123046875, 0.1455078125, 0.1865234375, 0.4384765625, 0.1396484375, 0.6181640625, 0.3447265625, 0.8505859375, 0.6787109375, 0.0361328125, 0.1298828125, 0.6650390625, 0.3623046875, 0.4638671875];
    assert_eq!(pts[4], row4);
    assert_eq!(pts[8], row8);
    assert_eq!(pts[31], row31);
    assert_eq!(pts[777], row777);
    assert_eq!(pts[1023], row1023);
    let total: f64 = pts.iter().flatten().sum();
    let weighted: f64 = pts.iter().map(|p| p.iter().enumerate().map(|(k, x)| (k + 1) as f64 * x).sum::<f64>()).sum();
    assert_eq!((total, weighted), (8184.0, 69564.0));

    let deep = sobol_generate(16, 1, 100_003).unwrap();
    let expected = [0.31107330322265625, 0.8575820922851562, 0.19358062744140625, 0.37081146240234375, 0.8555526733398438, 0.7156753540039062, 0.8110122680664062, 0.28574371337890625, 0.27039337158203125, 0.5199661254882812, 0.02794647216796875, 0.20186614990234375, 0.31519317626953125, 0.9468612670898438, 0.34619903564453125, 0.8092880249023438];
    assert_eq!(deep[0], expected);
}

#[test]
fn elementary_intervals_hold_one_point_each() {
    for m in 0..=8u32 {
        let n = 1usize << m;
        let pts = sobol_generate(2, n, 0).unwrap();
        let one_d = sobol_generate(1, n, 0).unwrap();
        let mut seen = vec![false; n];
        for p in &one_d {
            let cell = (p[0] * n as f64) as usize;
            assert!(!seen[cell]);
            seen[cell] = true;
        }
        for a in 0..=m {
            let (nx, ny) = (1usize << a, 1usize << (m - a));
            let mut counts = vec![0u32; n];
            for p in &pts {
                let i = (p[0] * nx as f64) as usize;
                let j = (p[1] * ny as f64) as usize;
                counts[i * ny + j] += 1;
            }
            assert!(counts.iter().all(|&c| c == 1), "m={m} a={a}");
        }
    }
}

// Lower-bound estimate of the star discrepancy over anchored boxes [0, y).
fn star_discrepancy(points: &[Vec<f64>], anchors: &[Vec<f64>]) -> f64 {
    let n = points.len() as f64;
    let mut worst: f64 = 0.0;
    for y in anchors {
        let vol: f64 = y.iter().product();
        let mut open = 0usize;
        let mut closed = 0usize;
        for p in points {
            if p.iter().zip(y).all(|(a, b)| a < b) {
                open += 1;
            }
            if p.iter().zip(y).all(|(a, b)| a <= b) {
                closed += 1;
            }
        }
        worst = worst.max((open as f64 / n - vol).abs()).max((closed as f64 / n - vol).abs());
    }
    worst
}

#[test]
fn lower_discrepancy_than_random_points() {
    let (d, n) = (5, 256);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let random_anchors: Vec<Vec<f64>> = (0..3000).map(|_| (0..d).map(|_| rng.random()).collect()).collect();
    let with_anchors = |pts: &[Vec<f64>]| {
        let mut anchors = random_anchors.clone();
        anchors.extend(pts.iter().cloned());
        star_discrepancy(pts, &anchors)
    };
    let sobol = with_anchors(&sobol_generate(d, n, 0).unwrap());
    let mut random_mean = 0.0;
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random()).collect()).collect();
        random_mean += with_anchors(&pts) / 20.0;
    }
    assert!(sobol < random_mean, "sobol {sobol} random {random_mean}");
}
