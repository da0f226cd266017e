//! 2D embedding of a distance matrix by classical scaling, out-of-sample
//! placement of new points, and the stress quality measure.
//!
//! Classical scaling double-centers the squared distances and takes the top
//! eigenpairs of the Jacobi eigendecomposition; negative eigenvalues clamp
//! their coordinates to zero. Axis signs are canonicalized so the
//! largest-magnitude loading on each axis is positive, making output
//! byte-stable.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::distance::DistanceMatrix;
use crate::linalg::{sym_eigen, Matrix};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("dimension {dim} too large for {points} points")]
    DimTooLarge { dim: usize, points: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Per-dataset coordinates plus the stress of the configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding2D {
    names: Vec<String>,
    coords: Matrix,
    stress: f64,
}

impl Embedding2D {
    pub fn new(names: Vec<String>, coords: Matrix, stress: f64) -> Result<Self, EmbedError> {
        if names.len() != coords.nrows() {
            return Err(EmbedError::ShapeMismatch(format!(
                "{} names vs {} coordinate rows",
                names.len(),
                coords.nrows()
            )));
        }
        Ok(Embedding2D {
            names,
            coords,
            stress,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn coords(&self) -> &Matrix {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }

    pub fn stress(&self) -> f64 {
        self.stress
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.coords.row(i)
    }

    /// Euclidean distance between two embedded points.
    pub fn realized_distance(&self, i: usize, j: usize) -> f64 {
        crate::linalg::euclidean(self.coords.row(i), self.coords.row(j))
    }

    /// CSV rows `name,x,y` with a trailing stress comment.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name");
        for k in 0..self.dim() {
            let _ = write!(out, ",{}", ["x", "y", "z"].get(k).copied().unwrap_or("c"));
        }
        out.push('\n');
        for i in 0..self.names.len() {
            out.push_str(&self.names[i]);
            for v in self.coords.row(i) {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "# stress = {}", self.stress);
        out
    }

    /// Parse the CSV form; out-of-sample rows carry a trailing `oos` marker
    /// and are returned separately.
    pub fn from_csv(text: &str) -> Result<(Embedding2D, Vec<(String, Vec<f64>)>), EmbedError> {
        let bad = |line: usize, msg: &str| EmbedError::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
        let dim = header.split(',').count().saturating_sub(1);
        if !header.starts_with("name,") || dim == 0 {
            return Err(bad(1, "header must be name,x,..."));
        }
        let mut names = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut oos = Vec::new();
        let mut stress = None;
        for (idx, raw) in lines {
            let line = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            if let Some(rest) = raw.strip_prefix("# stress = ") {
                stress = Some(rest.trim().parse().map_err(|_| bad(line, "bad stress"))?);
                continue;
            }
            let fields: Vec<&str> = raw.split(',').collect();
            let is_oos = fields.len() == dim + 2 && fields[dim + 1] == "oos";
            if !(fields.len() == dim + 1 || is_oos) {
                return Err(bad(line, "wrong column count"));
            }
            let mut coords = Vec::with_capacity(dim);
            for f in &fields[1..=dim] {
                coords.push(f.parse().map_err(|_| bad(line, "bad coordinate"))?);
            }
            if is_oos {
                oos.push((fields[0].to_string(), coords));
            } else {
                names.push(fields[0].to_string());
                rows.push(coords);
            }
        }
        let stress = stress.ok_or_else(|| bad(0, "missing stress comment"))?;
        let embedding = Embedding2D::new(names, Matrix::from_rows(&rows), stress)?;
        Ok((embedding, oos))
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<(Embedding2D, Vec<(String, Vec<f64>)>), EmbedError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| EmbedError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Embedding2D::from_csv(&text)
    }
}

/// Normalized residual between the input distances and the configuration:
/// `sqrt(sum (d_ij - dhat_ij)^2 / sum d_ij^2)` over pairs `i < j`. Zero for
/// an all-zero distance matrix.
pub fn stress(coords: &Matrix, dist: &DistanceMatrix) -> Result<f64, EmbedError> {
    let n = dist.len();
    if coords.nrows() != n {
        return Err(EmbedError::ShapeMismatch(format!(
            "{} coordinate rows vs {} distances",
            coords.nrows(),
            n
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist.get(i, j);
            let realized = crate::linalg::euclidean(coords.row(i), coords.row(j));
            num += (d - realized) * (d - realized);
            den += d * d;
        }
    }
    if den == 0.0 {
        return Ok(if num == 0.0 { 0.0 } else { 1.0 });
    }
    Ok((num / den).sqrt())
}

/// Classical (double-centering) scaling of a distance matrix into `dim`
/// coordinates.
pub fn classical_mds(dist: &DistanceMatrix, dim: usize) -> Result<Embedding2D, EmbedError> {
    let n = dist.len();
    if n < 3 {
        return Err(EmbedError::TooFewPoints(n));
    }
    if dim == 0 || dim > n - 1 {
        return Err(EmbedError::DimTooLarge { dim, points: n });
    }

    // b = -1/2 J D^2 J
    let mut sq = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let d = dist.get(i, j);
            sq.set(i, j, d * d);
        }
    }
    let mut row_mean = vec![0.0; n];
    let mut grand = 0.0;
    for i in 0..n {
        let m: f64 = sq.row(i).iter().sum::<f64>() / n as f64;
        row_mean[i] = m;
        grand += m;
    }
    grand /= n as f64;
    let mut b = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b.set(
                i,
                j,
                -0.5 * (sq.get(i, j) - row_mean[i] - row_mean[j] + grand),
            );
        }
    }

    let (eigenvalues, vectors) = sym_eigen(&b);
    let mut coords = Matrix::zeros(n, dim);
    for k in 0..dim {
        let lambda = eigenvalues[k];
        if lambda <= 0.0 {
            continue; // clamp negative/zero eigenvalues to the origin
        }
        let scale = lambda.sqrt();
        // canonical sign: largest-magnitude loading positive
        let mut sign = 1.0;
        let mut best = 0.0;
        for i in 0..n {
            let v = vectors.get(i, k);
            if v.abs() > best {
                best = v.abs();
                sign = if v >= 0.0 { 1.0 } else { -1.0 };
            }
        }
        for i in 0..n {
            coords.set(i, k, sign * vectors.get(i, k) * scale);
        }
    }

    let stress_value = stress(&coords, dist)?;
    Embedding2D::new(dist.names().to_vec(), coords, stress_value)
}

const OOS_MAX_ITER: usize = 500;
const OOS_SIMPLEX_TOL: f64 = 1e-10;

fn oos_objective(base: &Embedding2D, dists: &[f64], z: [f64; 2]) -> f64 {
    let mut total = 0.0;
    for (i, &target) in dists.iter().enumerate() {
        let p = base.point(i);
        let d = ((z[0] - p[0]).powi(2) + (z[1] - p[1]).powi(2)).sqrt();
        total += (d - target) * (d - target);
    }
    total
}

fn nelder_mead_2d(f: impl Fn([f64; 2]) -> f64, start: [f64; 2], scale: f64) -> ([f64; 2], f64) {
    let mut simplex = [
        start,
        [start[0] + scale, start[1]],
        [start[0], start[1] + scale],
    ];
    let mut values = [f(simplex[0]), f(simplex[1]), f(simplex[2])];

    for _ in 0..OOS_MAX_ITER {
        // order: best, middle, worst
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite objective"));
        let (b, m, w) = (order[0], order[1], order[2]);

        let diameter = simplex
            .iter()
            .flat_map(|p| {
                simplex
                    .iter()
                    .map(move |q| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt())
            })
            .fold(0.0, f64::max);
        if diameter < OOS_SIMPLEX_TOL {
            break;
        }

        let centroid = [
            (simplex[b][0] + simplex[m][0]) / 2.0,
            (simplex[b][1] + simplex[m][1]) / 2.0,
        ];
        let reflect = [
            centroid[0] + (centroid[0] - simplex[w][0]),
            centroid[1] + (centroid[1] - simplex[w][1]),
        ];
        let f_reflect = f(reflect);

        if f_reflect < values[b] {
            let expand = [
                centroid[0] + 2.0 * (centroid[0] - simplex[w][0]),
                centroid[1] + 2.0 * (centroid[1] - simplex[w][1]),
            ];
            let f_expand = f(expand);
            if f_expand < f_reflect {
                simplex[w] = expand;
                values[w] = f_expand;
            } else {
                simplex[w] = reflect;
                values[w] = f_reflect;
            }
        } else if f_reflect < values[m] {
            simplex[w] = reflect;
            values[w] = f_reflect;
        } else {
            let contract = [
                centroid[0] + 0.5 * (simplex[w][0] - centroid[0]),
                centroid[1] + 0.5 * (simplex[w][1] - centroid[1]),
            ];
            let f_contract = f(contract);
            if f_contract < values[w] {
                simplex[w] = contract;
                values[w] = f_contract;
            } else {
                // shrink toward the best vertex
                for k in [m, w] {
                    simplex[k] = [
                        simplex[b][0] + 0.5 * (simplex[k][0] - simplex[b][0]),
                        simplex[b][1] + 0.5 * (simplex[k][1] - simplex[b][1]),
                    ];
                    values[k] = f(simplex[k]);
                }
            }
        }
    }

    let mut best = 0usize;
    for k in 1..3 {
        if values[k] < values[best] {
            best = k;
        }
    }
    (simplex[best], values[best])
}

/// Place a new point into an existing 2D embedding by minimizing the squared
/// mismatch between its embedded distances and `dists_to_base`. Five
/// deterministic starts (centroid plus four axis perturbations); the best
/// final objective wins, earlier starts winning ties.
pub fn out_of_sample(base: &Embedding2D, dists_to_base: &[f64]) -> Result<(f64, f64), EmbedError> {
    if base.dim() != 2 {
        return Err(EmbedError::ShapeMismatch(format!(
            "out-of-sample placement needs a 2D base, got {}D",
            base.dim()
        )));
    }
    if dists_to_base.len() != base.names().len() {
        return Err(EmbedError::ShapeMismatch(format!(
            "{} distances vs {} base points",
            dists_to_base.len(),
            base.names().len()
        )));
    }
    if dists_to_base.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(EmbedError::ShapeMismatch(
            "distances must be finite and nonnegative".into(),
        ));
    }

    let n = base.names().len() as f64;
    let centroid = [
        (0..base.names().len()).map(|i| base.point(i)[0]).sum::<f64>() / n,
        (0..base.names().len()).map(|i| base.point(i)[1]).sum::<f64>() / n,
    ];
    let spread = (0..base.names().len())
        .map(|i| {
            let p = base.point(i);
            ((p[0] - centroid[0]).powi(2) + (p[1] - centroid[1]).powi(2)).sqrt()
        })
        .fold(0.0, f64::max)
        .max(1.0);

    let starts = [
        centroid,
        [centroid[0] + spread, centroid[1]],
        [centroid[0] - spread, centroid[1]],
        [centroid[0], centroid[1] + spread],
        [centroid[0], centroid[1] - spread],
    ];

    let objective = |z: [f64; 2]| oos_objective(base, dists_to_base, z);
    let mut best: Option<([f64; 2], f64)> = None;
    for start in starts {
        let (point, value) = nelder_mead_2d(objective, start, spread * 0.25);
        if best.as_ref().is_none_or(|(_, bv)| value < *bv) {
            best = Some((point, value));
        }
    }
    let (point, _) = best.expect("at least one start");
    Ok((point[0], point[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn dist_from_points(points: &[(f64, f64)]) -> DistanceMatrix {
        let n = points.len();
        let mut values = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let d = ((points[i].0 - points[j].0).powi(2)
                    + (points[i].1 - points[j].1).powi(2))
                .sqrt();
                values.set(i, j, if i == j { 0.0 } else { d });
            }
        }
        let names = (0..n).map(|i| format!("p{i}")).collect();
        DistanceMatrix::new(names, values).unwrap()
    }

    #[test]
    fn equilateral_triangle_embeds_exactly() {
        let mut values = Matrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    values.set(i, j, 1.0);
                }
            }
        }
        let dist = DistanceMatrix::new(vec!["a".into(), "b".into(), "c".into()], values).unwrap();
        let emb = classical_mds(&dist, 2).unwrap();
        for i in 0..3 {
            for j in (i + 1)..3 {
                assert!((emb.realized_distance(i, j) - 1.0).abs() < 1e-9);
            }
        }
        assert!(emb.stress() < 1e-9);
    }

    #[test]
    fn planted_plane_recovered() {
        let mut s = Stream::new(&[404]);
        let points: Vec<(f64, f64)> = (0..20)
            .map(|_| (s.uniform(-5.0, 5.0), s.uniform(-5.0, 5.0)))
            .collect();
        let dist = dist_from_points(&points);
        let emb = classical_mds(&dist, 2).unwrap();
        assert!(emb.stress() < 1e-6, "stress {}", emb.stress());
        for i in 0..20 {
            for j in (i + 1)..20 {
                let d = dist.get(i, j);
                let r = emb.realized_distance(i, j);
                assert!((d - r).abs() <= 1e-6 * d.max(1e-9), "{d} vs {r}");
            }
        }
    }

    #[test]
    fn simplex_cannot_flatten() {
        // regular 3-simplex needs 3 dimensions
        let mut values = Matrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    values.set(i, j, 1.0);
                }
            }
        }
        let names = (0..4).map(|i| format!("s{i}")).collect();
        let dist = DistanceMatrix::new(names, values).unwrap();
        let emb = classical_mds(&dist, 2).unwrap();
        assert!(emb.stress() > 0.0);
    }

    #[test]
    fn rejects_tiny_inputs() {
        let dist = dist_from_points(&[(0.0, 0.0), (1.0, 0.0)]);
        assert!(matches!(
            classical_mds(&dist, 2),
            Err(EmbedError::TooFewPoints(2))
        ));
        let dist3 = dist_from_points(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        assert!(matches!(
            classical_mds(&dist3, 3),
            Err(EmbedError::DimTooLarge { .. })
        ));
    }

    #[test]
    fn embedding_deterministic_and_order_invariant() {
        let mut s = Stream::new(&[21]);
        let points: Vec<(f64, f64)> = (0..8)
            .map(|_| (s.uniform(-3.0, 3.0), s.uniform(-3.0, 3.0)))
            .collect();
        let dist = dist_from_points(&points);
        let a = classical_mds(&dist, 2).unwrap();
        let b = classical_mds(&dist, 2).unwrap();
        assert_eq!(a, b);

        // reversed input order: realized distances must agree pairwise
        let n = points.len();
        let mut rev_values = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                rev_values.set(i, j, dist.get(n - 1 - i, n - 1 - j));
            }
        }
        let rev_names: Vec<String> = (0..n).map(|i| format!("p{}", n - 1 - i)).collect();
        let rev = classical_mds(&DistanceMatrix::new(rev_names, rev_values).unwrap(), 2).unwrap();
        for i in 0..n {
            for j in (i + 1)..n {
                let d1 = a.realized_distance(i, j);
                let d2 = rev.realized_distance(n - 1 - i, n - 1 - j);
                assert!((d1 - d2).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn stress_analytic_cases() {
        let points = [(0.0, 0.0), (1.0, 0.0), (0.0, 2.0)];
        let dist = dist_from_points(&points);
        let coords = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 2.0]]);
        assert!(stress(&coords, &dist).unwrap() < 1e-12);
        // all points at the origin: residual equals the total
        let collapsed = Matrix::zeros(3, 2);
        assert!((stress(&collapsed, &dist).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stress_grows_under_perturbation() {
        let points = [(0.0, 0.0), (2.0, 0.0), (0.0, 3.0), (2.0, 3.0)];
        let dist = dist_from_points(&points);
        let exact = Matrix::from_rows(&[
            vec![0.0, 0.0],
            vec![2.0, 0.0],
            vec![0.0, 3.0],
            vec![2.0, 3.0],
        ]);
        let base = stress(&exact, &dist).unwrap();
        let mut worse = exact.clone();
        worse.set(0, 0, 0.3);
        assert!(stress(&worse, &dist).unwrap() > base);
    }

    #[test]
    fn oos_recovers_existing_point() {
        let mut s = Stream::new(&[77]);
        let points: Vec<(f64, f64)> = (0..10)
            .map(|_| (s.uniform(-4.0, 4.0), s.uniform(-4.0, 4.0)))
            .collect();
        let dist = dist_from_points(&points);
        let emb = classical_mds(&dist, 2).unwrap();
        // distances to the realized position of point 3
        let target = emb.point(3).to_vec();
        let dists: Vec<f64> = (0..10)
            .map(|i| crate::linalg::euclidean(&target, emb.point(i)))
            .collect();
        let (x, y) = out_of_sample(&emb, &dists).unwrap();
        let err = ((x - target[0]).powi(2) + (y - target[1]).powi(2)).sqrt();
        assert!(err < 1e-6, "recovered ({x}, {y}) vs {target:?}");
    }

    #[test]
    fn oos_isoceles_apex() {
        let base = Embedding2D::new(
            vec!["a".into(), "b".into()],
            Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]),
            0.0,
        )
        .unwrap();
        let (x, y) = out_of_sample(&base, &[1.0, 1.0]).unwrap();
        let da = (x * x + y * y).sqrt();
        let db = ((x - 1.0).powi(2) + y * y).sqrt();
        assert!((da - 1.0).abs() < 1e-6);
        assert!((db - 1.0).abs() < 1e-6);
        assert!((x - 0.5).abs() < 1e-6);
    }

    #[test]
    fn oos_zero_distances_find_least_squares_point() {
        let base = Embedding2D::new(
            vec!["a".into(), "b".into(), "c".into()],
            Matrix::from_rows(&[vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0]]),
            0.0,
        )
        .unwrap();
        let dists = [0.0, 0.0, 0.0];
        let (x, y) = out_of_sample(&base, &dists).unwrap();
        let found = oos_objective(&base, &dists, [x, y]);
        // grid-search oracle over the bounding box
        let mut grid_best = f64::INFINITY;
        for gx in 0..200 {
            for gy in 0..200 {
                let p = [-1.0 + 4.0 * gx as f64 / 199.0, -1.0 + 4.0 * gy as f64 / 199.0];
                grid_best = grid_best.min(oos_objective(&base, &dists, p));
            }
        }
        assert!(found <= grid_best + 1e-3);
        // squared-distance least squares: the centroid
        assert!((x - 2.0 / 3.0).abs() < 1e-6);
        assert!((y - 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn oos_rejects_bad_lengths() {
        let base = Embedding2D::new(
            vec!["a".into(), "b".into(), "c".into()],
            Matrix::from_rows(&[vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0]]),
            0.0,
        )
        .unwrap();
        assert!(out_of_sample(&base, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn embedding_csv_roundtrip_with_oos_rows() {
        let emb = Embedding2D::new(
            vec!["a".into(), "b".into(), "c".into()],
            Matrix::from_rows(&[vec![0.5, -1.25], vec![2.0, 0.0], vec![0.0, 2.0]]),
            0.0125,
        )
        .unwrap();
        let mut text = emb.to_csv();
        text.push_str("newpoint,0.75,0.5,oos\n");
        let (back, oos) = Embedding2D::from_csv(&text).unwrap();
        assert_eq!(back, emb);
        assert_eq!(oos.len(), 1);
        assert_eq!(oos[0].0, "newpoint");
        assert_eq!(oos[0].1, vec![0.75, 0.5]);
    }
}
