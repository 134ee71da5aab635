//! Tabular samples `(x, y, z)` and the pseudo-copula rank transform.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which CSV columns hold `x`, `y` and the conditioning vector `z`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub x: String,
    pub y: String,
    pub z: Vec<String>,
}

impl ColumnSpec {
    pub fn new(x: impl Into<String>, y: impl Into<String>, z: &[&str]) -> Self {
        Self {
            x: x.into(),
            y: y.into(),
            z: z.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Default names `x`, `y`, `z1..zd`.
    pub fn default_for(d: usize) -> Self {
        Self {
            x: "x".into(),
            y: "y".into(),
            z: (1..=d).map(|j| format!("z{j}")).collect(),
        }
    }
}

/// `n` observations of scalar `x`, `y` and a `d`-vector `z`.
///
/// `z` is stored column-wise: `z[j][i]` is coordinate `j` of observation `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<Vec<f64>>,
    columns: ColumnSpec,
    transformed: bool,
}

impl Dataset {
    /// Builds an untransformed dataset with default column names.
    pub fn new(x: Vec<f64>, y: Vec<f64>, z: Vec<Vec<f64>>) -> Result<Self> {
        let columns = ColumnSpec::default_for(z.len());
        Self::with_columns(x, y, z, columns)
    }

    pub fn with_columns(
        x: Vec<f64>,
        y: Vec<f64>,
        z: Vec<Vec<f64>>,
        columns: ColumnSpec,
    ) -> Result<Self> {
        let n = x.len();
        if n == 0 {
            return Err(Error::EmptyData);
        }
        if y.len() != n {
            return Err(Error::Shape(format!("x has {n} rows but y has {}", y.len())));
        }
        for (j, col) in z.iter().enumerate() {
            if col.len() != n {
                return Err(Error::Shape(format!(
                    "x has {n} rows but z column {j} has {}",
                    col.len()
                )));
            }
        }
        if columns.z.len() != z.len() {
            return Err(Error::Shape(format!(
                "{} z column names for {} z columns",
                columns.z.len(),
                z.len()
            )));
        }
        let all_finite = x
            .iter()
            .chain(&y)
            .chain(z.iter().flatten())
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::Domain("dataset contains non-finite values".into()));
        }
        Ok(Self {
            x,
            y,
            z,
            columns,
            transformed: false,
        })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn d(&self) -> usize {
        self.z.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Column `j` of `z`.
    pub fn z_col(&self, j: usize) -> &[f64] {
        &self.z[j]
    }

    pub fn z_cols(&self) -> &[Vec<f64>] {
        &self.z
    }

    /// Row `i` of `z` copied into a fresh vector.
    pub fn z_row(&self, i: usize) -> Vec<f64> {
        self.z.iter().map(|col| col[i]).collect()
    }

    pub fn columns(&self) -> &ColumnSpec {
        &self.columns
    }

    pub fn is_transformed(&self) -> bool {
        self.transformed
    }

    /// Applies `f` to `x`, keeping everything else. Used for marginal transforms.
    pub fn map_x(mut self, f: impl Fn(f64) -> f64) -> Self {
        self.x.iter_mut().for_each(|v| *v = f(*v));
        self
    }

    pub fn map_y(mut self, f: impl Fn(f64) -> f64) -> Self {
        self.y.iter_mut().for_each(|v| *v = f(*v));
        self
    }

    pub fn map_z(mut self, j: usize, f: impl Fn(f64) -> f64) -> Self {
        self.z[j].iter_mut().for_each(|v| *v = f(*v));
        self
    }

    /// Pseudo-copula observations: every coordinate replaced by its average
    /// rank divided by `n + 1`.
    pub fn to_pseudo_obs(&self) -> Result<Dataset> {
        if self.transformed {
            return Err(Error::Domain(
                "dataset is already transformed to pseudo-observations".into(),
            ));
        }
        Ok(Dataset {
            x: pseudo_obs(&self.x),
            y: pseudo_obs(&self.y),
            z: self.z.iter().map(|c| pseudo_obs(c)).collect(),
            columns: self.columns.clone(),
            transformed: true,
        })
    }

    /// Marks data already living in `(0,1)` as transformed.
    pub fn assume_transformed(mut self) -> Result<Dataset> {
        let inside = self
            .x
            .iter()
            .chain(&self.y)
            .chain(self.z.iter().flatten())
            .all(|&v| v > 0.0 && v < 1.0);
        if !inside {
            return Err(Error::Domain(
                "transformed data must lie in the open interval (0,1)".into(),
            ));
        }
        self.transformed = true;
        Ok(self)
    }

    pub fn load_csv(path: impl AsRef<Path>, spec: &ColumnSpec) -> Result<Dataset> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(file, spec)
    }

    pub fn read_csv<R: Read>(reader: R, spec: &ColumnSpec) -> Result<Dataset> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let find = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingColumn(name.to_string()))
        };
        let ix = find(&spec.x)?;
        let iy = find(&spec.y)?;
        let iz = spec
            .z
            .iter()
            .map(|name| find(name))
            .collect::<Result<Vec<_>>>()?;

        let mut x = Vec::new();
        let mut y = Vec::new();
        let mut z = vec![Vec::new(); iz.len()];
        for (r, record) in rdr.records().enumerate() {
            let record = record?;
            let row = r + 1;
            let cell = |idx: usize, name: &str| -> Result<f64> {
                let raw = record.get(idx).unwrap_or("");
                match raw.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(Error::Parse {
                        row,
                        column: name.to_string(),
                        value: raw.to_string(),
                    }),
                }
            };
            x.push(cell(ix, &spec.x)?);
            y.push(cell(iy, &spec.y)?);
            for (k, (&idx, name)) in iz.iter().zip(&spec.z).enumerate() {
                z[k].push(cell(idx, name)?);
            }
        }
        if x.is_empty() {
            return Err(Error::EmptyData);
        }
        Dataset::with_columns(x, y, z, spec.clone())
    }

    /// Writes `x, y, z1..zd` (in the stored column order) with a header row.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec![self.columns.x.clone(), self.columns.y.clone()];
        header.extend(self.columns.z.iter().cloned());
        wtr.write_record(&header)?;
        let mut row = Vec::with_capacity(header.len());
        for i in 0..self.n() {
            row.clear();
            row.push(self.x[i].to_string());
            row.push(self.y[i].to_string());
            row.extend(self.z.iter().map(|c| c[i].to_string()));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Average ranks (1-based) with ties sharing the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end (0-based) share rank mean((start+1)..=end)
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

/// `rank_i / (n + 1)` with average ranks.
pub fn pseudo_obs(values: &[f64]) -> Vec<f64> {
    let denom = (values.len() + 1) as f64;
    average_ranks(values)
        .into_iter()
        .map(|r| r / denom)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pseudo_obs_small_examples() {
        assert_eq!(pseudo_obs(&[5.0, 1.0, 3.0]), vec![0.75, 0.25, 0.5]);
        assert_eq!(pseudo_obs(&[2.0, 2.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn ties_share_average_rank() {
        assert_eq!(average_ranks(&[1.0, 3.0, 3.0, 3.0, 0.0]), vec![2.0, 4.0, 4.0, 4.0, 1.0]);
    }

    #[test]
    fn pseudo_obs_rejects_double_transform() {
        let d = Dataset::new(vec![1.0, 2.0], vec![2.0, 1.0], vec![]).unwrap();
        let t = d.to_pseudo_obs().unwrap();
        assert!(t.is_transformed());
        assert!(matches!(t.to_pseudo_obs(), Err(Error::Domain(_))));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let err = Dataset::new(vec![1.0, 2.0], vec![1.0], vec![]).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
        assert!(matches!(Dataset::new(vec![], vec![], vec![]), Err(Error::EmptyData)));
    }

    #[test]
    fn csv_loading() {
        let text = "x,y,z1,z2\n1,2,3,4\n5,6,7,8\n9,10,11,12\n";
        let d = Dataset::read_csv(text.as_bytes(), &ColumnSpec::new("x", "y", &["z1", "z2"])).unwrap();
        assert_eq!((d.n(), d.d()), (3, 2));
        assert_eq!(d.z_row(1), vec![7.0, 8.0]);
        assert!(!d.is_transformed());

        let nan = "x,y,z\n1,2,3\n1,NaN,3\n";
        match Dataset::read_csv(nan.as_bytes(), &ColumnSpec::new("x", "y", &["z"])) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "y");
            }
            other => panic!("expected parse error, got {other:?}"),
        }

        let header_only = "x,y,z\n";
        assert!(matches!(
            Dataset::read_csv(header_only.as_bytes(), &ColumnSpec::new("x", "y", &["z"])),
            Err(Error::EmptyData)
        ));

        match Dataset::read_csv(text.as_bytes(), &ColumnSpec::new("x", "y", &["z9"])) {
            Err(Error::MissingColumn(c)) => assert_eq!(c, "z9"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn csv_write_round_trip() {
        let d = Dataset::new(vec![0.1, -2.5], vec![1e-7, 3.0], vec![vec![0.3, 0.7]]).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = Dataset::read_csv(buf.as_slice(), d.columns()).unwrap();
        assert_eq!(back, d);
    }

    fn distinct(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::btree_set(-1_000_000i64..1_000_000, len)
            .prop_map(|s| s.into_iter().map(|v| v as f64 / 1000.0).collect::<Vec<_>>())
            .prop_shuffle()
    }

    proptest! {
        #[test]
        fn tie_free_output_is_regular_grid(v in distinct(1..60)) {
            let n = v.len();
            let mut out = pseudo_obs(&v);
            out.sort_by(f64::total_cmp);
            for (i, u) in out.iter().enumerate() {
                prop_assert_eq!(*u, (i + 1) as f64 / (n + 1) as f64);
            }
        }

        #[test]
        fn invariant_under_increasing_maps(v in distinct(1..60)) {
            let mapped: Vec<f64> = v.iter().map(|t| t.powi(3) + t.atan()).collect();
            prop_assert_eq!(pseudo_obs(&v), pseudo_obs(&mapped));
        }

        #[test]
        fn idempotent_and_permutation_equivariant(
            v in prop::collection::vec(-5i32..5, 1..40).prop_map(|v| v.into_iter().map(f64::from).collect::<Vec<_>>()),
            seed in any::<u64>(),
        ) {
            let once = pseudo_obs(&v);
            prop_assert_eq!(pseudo_obs(&once), once.clone());
            prop_assert!(once.iter().all(|&u| u > 0.0 && u < 1.0));

            let n = v.len();
            let mut perm: Vec<usize> = (0..n).collect();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            let permuted: Vec<f64> = perm.iter().map(|&i| v[i]).collect();
            let out = pseudo_obs(&permuted);
            for (k, &i) in perm.iter().enumerate() {
                prop_assert_eq!(out[k], once[i]);
            }
        }
    }
}
