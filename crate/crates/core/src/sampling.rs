//! Latin hypercube designs, unit-cube rescaling and training-set containers.
//!
//! All random draws use [`ChaCha8Rng`] seeded through `seed_from_u64`, so a
//! design is bit-reproducible on every platform. For each column of a design
//! the generator first shuffles the stratum indices `0..N` (Fisher-Yates, as
//! implemented by `rand::seq::SliceRandom::shuffle`) and then draws `N`
//! uniform jitters in `[0, 1)`, one per row in row order.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seedable generator used everywhere in the crate.
pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a master seed and a stream index into an independent child seed
/// (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Latin hypercube design of `count` points in `[0, 1)^dim`.
///
/// Every column has exactly one point in each stratum `[j/N, (j+1)/N)`.
pub fn lhs(dim: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if dim == 0 || count == 0 {
        return Err(Error::invalid(format!(
            "latin hypercube needs positive dimension and sample count (got {dim}, {count})"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut points = vec![vec![0.0; dim]; count];
    let mut strata: Vec<usize> = (0..count).collect();
    let n = count as f64;
    for k in 0..dim {
        strata.shuffle(&mut rng);
        for (row, &j) in points.iter_mut().zip(&strata) {
            let u: f64 = rng.gen();
            let hi = (j + 1) as f64 / n;
            let v = (j as f64 + u) / n;
            row[k] = if v >= hi { hi.next_down() } else { v };
        }
    }
    Ok(points)
}

/// Axis-aligned box in physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DomainBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::invalid("domain box needs at least one dimension"));
        }
        for (k, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(format!(
                    "domain box dimension {k}: need lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim], vec![1.0; dim])
    }

    /// `[lo, hi]` in every one of `dim` dimensions.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    /// Tight bounding box of a point cloud.
    pub fn bounding(points: &[Vec<f64>]) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::invalid("cannot bound an empty point set"))?;
        let mut lower = first.clone();
        let mut upper = first.clone();
        for p in points {
            if p.len() != lower.len() {
                return Err(Error::DimensionMismatch {
                    expected: lower.len(),
                    got: p.len(),
                });
            }
            for k in 0..p.len() {
                lower[k] = lower[k].min(p[k]);
                upper[k] = upper[k].max(p[k]);
            }
        }
        Self::new(lower, upper)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, k: usize) -> f64 {
        self.upper[k] - self.lower[k]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| v >= lo && v <= hi)
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Physical point to unit-cube coordinates. Points outside the box are
    /// mapped anyway (extrapolation) with a warning.
    pub fn to_unit(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        if !self.contains(x) {
            log::warn!("point {x:?} lies outside the domain box; extrapolating");
        }
        Ok((0..x.len())
            .map(|k| (x[k] - self.lower[k]) / self.width(k))
            .collect())
    }

    pub fn from_unit(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(u)?;
        Ok((0..u.len())
            .map(|k| self.lower[k] + u[k] * self.width(k))
            .collect())
    }

    /// Chain rule: gradient in physical coordinates to unit-cube coordinates.
    pub fn grad_to_unit(&self, g: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(g)?;
        Ok((0..g.len()).map(|k| g[k] * self.width(k)).collect())
    }

    pub fn grad_from_unit(&self, g: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(g)?;
        Ok((0..g.len()).map(|k| g[k] / self.width(k)).collect())
    }

    /// Latin hypercube design mapped into this box.
    pub fn lhs(&self, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        lhs(self.dim(), count, seed)?
            .iter()
            .map(|u| self.from_unit(u))
            .collect()
    }
}

/// Training data: sites in unit-cube coordinates, observed values and
/// (optionally) observed gradients with respect to unit-cube coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    dim: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    grad: Option<Vec<f64>>,
    domain: DomainBox,
}

impl SampleSet {
    /// Builds a set from unit-cube sites and unit-cube gradients.
    pub fn from_unit(
        domain: DomainBox,
        sites: &[Vec<f64>],
        values: Vec<f64>,
        gradients: Option<&[Vec<f64>]>,
    ) -> Result<Self> {
        let dim = domain.dim();
        let count = sites.len();
        if count == 0 {
            return Err(Error::invalid("sample set is empty"));
        }
        if values.len() != count {
            return Err(Error::invalid(format!(
                "{} sites but {} values",
                count,
                values.len()
            )));
        }
        let mut x = Vec::with_capacity(count * dim);
        for s in sites {
            if s.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: s.len(),
                });
            }
            x.extend_from_slice(s);
        }
        let grad = match gradients {
            Some(g) => {
                if g.len() != count {
                    return Err(Error::invalid(format!(
                        "{} sites but {} gradient rows",
                        count,
                        g.len()
                    )));
                }
                let mut flat = Vec::with_capacity(count * dim);
                for row in g {
                    if row.len() != dim {
                        return Err(Error::DimensionMismatch {
                            expected: dim,
                            got: row.len(),
                        });
                    }
                    flat.extend_from_slice(row);
                }
                Some(flat)
            }
            None => None,
        };
        let set = Self {
            dim,
            x,
            y: values,
            grad,
            domain,
        };
        set.validate()?;
        Ok(set)
    }

    /// Builds a set from physical sites and physical gradients.
    pub fn from_physical(
        domain: DomainBox,
        sites: &[Vec<f64>],
        values: Vec<f64>,
        gradients: Option<&[Vec<f64>]>,
    ) -> Result<Self> {
        let unit: Vec<Vec<f64>> = sites
            .iter()
            .map(|s| domain.to_unit(s))
            .collect::<Result<_>>()?;
        let grads: Option<Vec<Vec<f64>>> = gradients
            .map(|g| g.iter().map(|row| domain.grad_to_unit(row)).collect())
            .transpose()?;
        Self::from_unit(domain, &unit, values, grads.as_deref())
    }

    fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|c| c.is_finite());
        if !finite(&self.x) || !finite(&self.y) || !self.grad.as_deref().is_none_or(finite) {
            return Err(Error::invalid("sample set contains non-finite entries"));
        }
        for i in 0..self.len() {
            for j in 0..i {
                if self.site(i) == self.site(j) {
                    return Err(Error::invalid(format!("sites {j} and {i} coincide")));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    /// Site `i` in unit-cube coordinates.
    pub fn site(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn value(&self, i: usize) -> f64 {
        self.y[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn has_gradients(&self) -> bool {
        self.grad.is_some()
    }

    /// Observed gradient at site `i` in unit-cube coordinates.
    pub fn gradient(&self, i: usize) -> Option<&[f64]> {
        self.grad
            .as_ref()
            .map(|g| &g[i * self.dim..(i + 1) * self.dim])
    }

    pub fn sites(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.site(i).to_vec()).collect()
    }

    pub fn gradients(&self) -> Option<Vec<Vec<f64>>> {
        self.grad.as_ref().map(|_| {
            (0..self.len())
                .map(|i| self.gradient(i).unwrap().to_vec())
                .collect()
        })
    }

    /// Same data with the gradient columns dropped.
    pub fn without_gradients(&self) -> Self {
        Self {
            grad: None,
            ..self.clone()
        }
    }

    /// Rows `indices` in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                dim: self.len(),
            });
        }
        let sites: Vec<Vec<f64>> = indices.iter().map(|&i| self.site(i).to_vec()).collect();
        let values = indices.iter().map(|&i| self.y[i]).collect();
        let grads: Option<Vec<Vec<f64>>> = self.grad.as_ref().map(|_| {
            indices
                .iter()
                .map(|&i| self.gradient(i).unwrap().to_vec())
                .collect()
        });
        Self::from_unit(self.domain.clone(), &sites, values, grads.as_deref())
    }

    /// Reads the sample CSV schema: header `x_1..x_n, y[, dy_1..dy_n]`, one
    /// row per site, physical units. Without an explicit `domain` the
    /// bounding box of the sites is used.
    pub fn read_csv(path: &Path, domain: Option<DomainBox>) -> Result<Self> {
        let table = CsvTable::read(path)?;
        let xcols = table.indexed_columns("x_")?;
        if xcols.is_empty() {
            return Err(table.error(1, "header has no x_1.. columns"));
        }
        let ycol = table
            .column("y")
            .ok_or_else(|| table.error(1, "header has no y column"))?;
        let dycols = table.indexed_columns("dy_")?;
        if !dycols.is_empty() && dycols.len() != xcols.len() {
            return Err(table.error(
                1,
                &format!("{} x columns but {} dy columns", xcols.len(), dycols.len()),
            ));
        }
        let mut sites = Vec::with_capacity(table.rows.len());
        let mut values = Vec::with_capacity(table.rows.len());
        let mut grads = Vec::new();
        for (_, row) in &table.rows {
            sites.push(xcols.iter().map(|&c| row[c]).collect::<Vec<_>>());
            values.push(row[ycol]);
            if !dycols.is_empty() {
                grads.push(dycols.iter().map(|&c| row[c]).collect::<Vec<_>>());
            }
        }
        let domain = match domain {
            Some(d) => d,
            None => DomainBox::bounding(&sites)?,
        };
        if domain.dim() != xcols.len() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                got: xcols.len(),
            });
        }
        let grads = (!dycols.is_empty()).then_some(grads);
        Self::from_physical(domain, &sites, values, grads.as_deref())
    }

    /// Writes the sample CSV schema in physical units.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut header: Vec<String> = (1..=self.dim).map(|k| format!("x_{k}")).collect();
        header.push("y".into());
        if self.has_gradients() {
            header.extend((1..=self.dim).map(|k| format!("dy_{k}")));
        }
        let mut rows = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let mut row = self.domain.from_unit(self.site(i))?;
            row.push(self.y[i]);
            if let Some(g) = self.gradient(i) {
                row.extend(self.domain.grad_from_unit(g)?);
            }
            rows.push(row);
        }
        write_table(path, &header, &rows)
    }
}

/// Reads points (columns `x_1..x_n`, other columns ignored) in physical units.
pub fn read_points_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let table = CsvTable::read(path)?;
    let xcols = table.indexed_columns("x_")?;
    if xcols.is_empty() {
        return Err(table.error(1, "header has no x_1.. columns"));
    }
    Ok(table
        .rows
        .iter()
        .map(|(_, row)| xcols.iter().map(|&c| row[c]).collect())
        .collect())
}

/// Writes a header plus numeric rows. Values use Rust's shortest round-trip
/// formatting so files are byte-stable.
pub fn write_table(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(header).map_err(|e| csv_io(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string()))
            .map_err(|e| csv_io(path, e))?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        row: e.position().map_or(0, |p| p.line() as usize),
        message: e.to_string(),
    }
}

/// Numeric CSV with a header; rows carry their 1-based line number.
struct CsvTable {
    path: std::path::PathBuf,
    header: Vec<String>,
    rows: Vec<(usize, Vec<f64>)>,
}

impl CsvTable {
    fn read(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| csv_io(path, e))?;
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| csv_io(path, e))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_io(path, e))?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let mut vals = Vec::with_capacity(rec.len());
            for (field, name) in rec.iter().zip(&header) {
                let v: f64 = field.parse().map_err(|_| Error::Csv {
                    path: path.to_path_buf(),
                    row: line,
                    message: format!("column {name}: cannot parse {field:?} as a number"),
                })?;
                vals.push(v);
            }
            rows.push((line, vals));
        }
        Ok(Self {
            path: path.to_path_buf(),
            header,
            rows,
        })
    }

    fn error(&self, row: usize, message: &str) -> Error {
        Error::Csv {
            path: self.path.clone(),
            row,
            message: message.to_string(),
        }
    }

    fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Positions of `{prefix}1, {prefix}2, ...`, which must be contiguous from 1.
    fn indexed_columns(&self, prefix: &str) -> Result<Vec<usize>> {
        let mut found: Vec<(usize, usize)> = Vec::new();
        for (pos, h) in self.header.iter().enumerate() {
            if let Some(rest) = h.strip_prefix(prefix) {
                let k: usize = rest
                    .parse()
                    .map_err(|_| self.error(1, &format!("bad column name {h:?}")))?;
                found.push((k, pos));
            }
        }
        found.sort_unstable();
        for (expect, (k, _)) in (1..).zip(&found) {
            if *k != expect {
                return Err(self.error(1, &format!("missing column {prefix}{expect}")));
            }
        }
        Ok(found.into_iter().map(|(_, pos)| pos).collect())
    }
}
