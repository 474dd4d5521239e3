//! Random on-site potentials.
//!
//! Every site value is drawn from a counter-based ChaCha stream keyed on the
//! master seed, selected by the realization index, and positioned at the
//! site's flattened coordinate in the parent cube. A value therefore depends
//! only on `(master_seed, realization_index, site)`, never on the order in
//! which sites or realizations are visited.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::OnceLock;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Boundary, LatticeCube};

/// Nodes of the tabulated inverse CDF used for the smooth bump density.
pub const BUMP_TABLE_NODES: usize = 4096;

/// Single-site distribution before scaling by the coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SiteDistribution {
    /// Uniform density on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// The compactly supported C-infinity density `exp(-1/(1-t^2))` on
    /// `t in (-1, 1)`, shifted to `center` and stretched by `halfwidth`.
    SmoothBump { center: f64, halfwidth: f64 },
}

impl SiteDistribution {
    fn validate(&self) -> Result<()> {
        match *self {
            SiteDistribution::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::InvalidDisorder(format!("uniform needs lo < hi (got {lo}, {hi})")));
                }
            }
            SiteDistribution::SmoothBump { center, halfwidth } => {
                if !(center.is_finite() && halfwidth.is_finite() && halfwidth > 0.0) {
                    return Err(Error::InvalidDisorder(format!(
                        "smooth bump needs halfwidth > 0 (got {halfwidth})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Support `[a, b]` of the unscaled distribution.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            SiteDistribution::Uniform { lo, hi } => (lo, hi),
            SiteDistribution::SmoothBump { center, halfwidth } => (center - halfwidth, center + halfwidth),
        }
    }

    /// Map a uniform variate `u in [0, 1)` to a sample.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            SiteDistribution::Uniform { lo, hi } => lo + (hi - lo) * u,
            SiteDistribution::SmoothBump { center, halfwidth } => center + halfwidth * bump_quantile(u),
        }
    }
}

/// Disorder model: site distribution, coupling and seeding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderConfig {
    pub distribution: SiteDistribution,
    pub coupling: f64,
    pub master_seed: u64,
    pub realization_index: u64,
}

impl DisorderConfig {
    pub fn new(distribution: SiteDistribution, coupling: f64, master_seed: u64) -> Result<Self> {
        let cfg = DisorderConfig { distribution, coupling, master_seed, realization_index: 0 };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The same model at another realization index.
    pub fn realization(&self, index: u64) -> Self {
        DisorderConfig { realization_index: index, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        self.distribution.validate()?;
        if !(self.coupling.is_finite() && self.coupling >= 0.0) {
            return Err(Error::InvalidDisorder(format!("coupling must be >= 0 (got {})", self.coupling)));
        }
        Ok(())
    }

    /// Support of the scaled site values `coupling * omega`.
    pub fn scaled_support(&self) -> (f64, f64) {
        let (a, b) = self.distribution.support();
        let (x, y) = (self.coupling * a, self.coupling * b);
        (x.min(y), x.max(y))
    }

    /// Short textual digest of the model (seed excluded).
    pub fn digest(&self) -> String {
        match self.distribution {
            SiteDistribution::Uniform { lo, hi } => format!("uniform({lo},{hi})*{}", self.coupling),
            SiteDistribution::SmoothBump { center, halfwidth } => {
                format!("bump({center},{halfwidth})*{}", self.coupling)
            }
        }
    }

    fn stream(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.realization_index);
        rng
    }

    /// The scaled value at a single flattened site index of the parent cube.
    pub fn site_value(&self, flat_index: usize) -> f64 {
        let mut rng = self.stream();
        rng.set_word_pos(2 * flat_index as u128);
        self.coupling * self.distribution.quantile(unit_from_bits(rng.next_u64()))
    }
}

fn unit_from_bits(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn bump_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // cumulative trapezoid of the bump on a fine grid, then inverted at the nodes
        const FINE: usize = 1 << 16;
        let density = |t: f64| if t.abs() < 1.0 { (-1.0 / (1.0 - t * t)).exp() } else { 0.0 };
        let h = 2.0 / FINE as f64;
        let mut cdf = Vec::with_capacity(FINE + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        for i in 0..FINE {
            let a = -1.0 + i as f64 * h;
            acc += 0.5 * h * (density(a) + density(a + h));
            cdf.push(acc);
        }
        let total = acc;
        cdf.iter_mut().for_each(|c| *c /= total);

        let mut table = Vec::with_capacity(BUMP_TABLE_NODES);
        let mut j = 0;
        for k in 0..BUMP_TABLE_NODES {
            let u = k as f64 / (BUMP_TABLE_NODES - 1) as f64;
            if k == 0 {
                table.push(-1.0);
                continue;
            }
            if k == BUMP_TABLE_NODES - 1 {
                table.push(1.0);
                continue;
            }
            while cdf[j + 1] < u {
                j += 1;
            }
            let (c0, c1) = (cdf[j], cdf[j + 1]);
            let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
            table.push(-1.0 + (j as f64 + frac) * h);
        }
        table
    })
}

fn bump_quantile(u: f64) -> f64 {
    let table = bump_table();
    let x = u.clamp(0.0, 1.0) * (BUMP_TABLE_NODES - 1) as f64;
    let k = (x.floor() as usize).min(BUMP_TABLE_NODES - 2);
    let frac = x - k as f64;
    table[k] + frac * (table[k + 1] - table[k])
}

/// Site values of one disorder realization on a parent cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialField {
    parent: LatticeCube,
    values: Vec<f64>,
}

impl PotentialField {
    pub fn from_values(parent: LatticeCube, values: Vec<f64>) -> Result<Self> {
        if values.len() != parent.volume() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values for a cube of {} sites",
                values.len(),
                parent.volume()
            )));
        }
        Ok(PotentialField { parent, values })
    }

    /// All-zero field.
    pub fn zeros(parent: LatticeCube) -> Self {
        let n = parent.volume();
        PotentialField { parent, values: vec![0.0; n] }
    }

    pub fn parent(&self) -> &LatticeCube {
        &self.parent
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable access, mainly for locality experiments.
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Value at absolute lattice coordinates.
    pub fn at(&self, absolute: &[i64]) -> Option<f64> {
        self.parent.local_of(absolute).map(|l| self.values[self.parent.index(&l)])
    }

    /// Values of `cube` (which must lie inside the parent) in the cube's own
    /// row-major order.
    pub fn restrict(&self, cube: &LatticeCube) -> Result<Vec<f64>> {
        if !self.parent.contains_cube(cube) {
            return Err(Error::OutOfBounds(format!(
                "cube at {:?} with side {} does not fit in parent at {:?} with side {}",
                cube.origin(),
                cube.side(),
                self.parent.origin(),
                self.parent.side()
            )));
        }
        Ok((0..cube.volume())
            .map(|i| {
                let abs = cube.absolute(i);
                let local = self.parent.local_of(&abs).expect("containment checked");
                self.values[self.parent.index(&local)]
            })
            .collect())
    }

    /// Write `(coordinate..., value)` rows in row-major site order.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..self.parent.dim()).map(|a| format!("x{a}")).collect();
        header.push("value".into());
        w.write_record(&header)?;
        for (i, v) in self.values.iter().enumerate() {
            let mut row: Vec<String> = self.parent.absolute(i).iter().map(|c| c.to_string()).collect();
            row.push(format!("{v:e}"));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read a field written by [`write_csv`](Self::write_csv). Rows may come
    /// in any order; the cube geometry is inferred from the coordinates.
    pub fn read_csv<R: Read>(reader: R, boundary: Boundary) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let dim = r.headers()?.len().checked_sub(1).filter(|&d| d > 0).ok_or_else(|| {
            Error::InvalidArgument("field CSV needs at least one coordinate column".into())
        })?;
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse_err = |e: &dyn std::fmt::Display| Error::InvalidArgument(format!("bad field row: {e}"));
            let coords = (0..dim)
                .map(|a| rec[a].trim().parse::<i64>().map_err(|e| parse_err(&e)))
                .collect::<Result<Vec<_>>>()?;
            let value = rec[dim].trim().parse::<f64>().map_err(|e| parse_err(&e))?;
            rows.push((coords, value));
        }
        let origin: Vec<i64> = (0..dim)
            .map(|a| rows.iter().map(|(c, _)| c[a]).min().unwrap_or(0))
            .collect();
        let side = (rows.len() as f64).powf(1.0 / dim as f64).round() as usize;
        let cube = LatticeCube::with_origin(dim, side, boundary, origin)?;
        if cube.volume() != rows.len() {
            return Err(Error::InvalidArgument(format!("{} rows do not form a cube", rows.len())));
        }
        let mut values = vec![f64::NAN; cube.volume()];
        for (coords, v) in rows {
            let local = cube
                .local_of(&coords)
                .ok_or_else(|| Error::InvalidArgument(format!("row {coords:?} outside inferred cube")))?;
            values[cube.index(&local)] = v;
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidArgument("field CSV has duplicate or missing sites".into()));
        }
        PotentialField::from_values(cube, values)
    }

    /// Binary layout (little endian): magic `b"APF1"`, `dim: u32`, `side: u32`,
    /// boundary `u8` (0 periodic, 1 Dirichlet), `origin: [i64; dim]`, then
    /// `side^dim` `f64` values in row-major order.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"APF1")?;
        w.write_all(&(self.parent.dim() as u32).to_le_bytes())?;
        w.write_all(&(self.parent.side() as u32).to_le_bytes())?;
        w.write_all(&[match self.parent.boundary() {
            Boundary::Periodic => 0u8,
            Boundary::Dirichlet => 1u8,
        }])?;
        for o in self.parent.origin() {
            w.write_all(&o.to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"APF1" {
            return Err(Error::InvalidArgument("not a potential field file".into()));
        }
        let mut u4 = [0u8; 4];
        r.read_exact(&mut u4)?;
        let dim = u32::from_le_bytes(u4) as usize;
        r.read_exact(&mut u4)?;
        let side = u32::from_le_bytes(u4) as usize;
        let mut b = [0u8; 1];
        r.read_exact(&mut b)?;
        let boundary = match b[0] {
            0 => Boundary::Periodic,
            1 => Boundary::Dirichlet,
            x => return Err(Error::InvalidArgument(format!("bad boundary tag {x}"))),
        };
        let mut u8b = [0u8; 8];
        let mut origin = Vec::with_capacity(dim);
        for _ in 0..dim {
            r.read_exact(&mut u8b)?;
            origin.push(i64::from_le_bytes(u8b));
        }
        let cube = LatticeCube::with_origin(dim, side, boundary, origin)?;
        let mut values = Vec::with_capacity(cube.volume());
        for _ in 0..cube.volume() {
            r.read_exact(&mut u8b)?;
            values.push(f64::from_le_bytes(u8b));
        }
        PotentialField::from_values(cube, values)
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        self.write_binary(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

/// Draw `coupling * omega_n` for every site of `parent`.
pub fn sample_potential(parent: &LatticeCube, cfg: &DisorderConfig) -> Result<PotentialField> {
    cfg.validate()?;
    let mut rng = cfg.stream();
    let values = (0..parent.volume())
        .map(|_| cfg.coupling * cfg.distribution.quantile(unit_from_bits(rng.next_u64())))
        .collect();
    PotentialField::from_values(parent.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(side: usize) -> LatticeCube {
        LatticeCube::new(1, side, Boundary::Periodic).unwrap()
    }

    fn uniform(coupling: f64, seed: u64) -> DisorderConfig {
        DisorderConfig::new(SiteDistribution::Uniform { lo: -1.0, hi: 1.0 }, coupling, seed).unwrap()
    }

    #[test]
    fn zero_coupling_gives_zero_field() {
        let f = sample_potential(&cube(50), &uniform(0.0, 1)).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
        let bump = DisorderConfig::new(SiteDistribution::SmoothBump { center: 3.0, halfwidth: 1.0 }, 0.0, 1).unwrap();
        assert!(sample_potential(&cube(50), &bump).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn support_scales_with_coupling() {
        let f = sample_potential(&cube(2000), &uniform(5.0, 7)).unwrap();
        assert!(f.values().iter().all(|&v| (-5.0..=5.0).contains(&v)));
        assert!(f.values().iter().any(|&v| v > 4.0) && f.values().iter().any(|&v| v < -4.0));
    }

    #[test]
    fn deterministic_and_order_independent() {
        let cfg = uniform(2.0, 42).realization(3);
        let a = sample_potential(&cube(100), &cfg).unwrap();
        let b = sample_potential(&cube(100), &cfg).unwrap();
        assert_eq!(a.values(), b.values());
        for i in [0usize, 17, 99] {
            assert_eq!(cfg.site_value(i).to_bits(), a.values()[i].to_bits());
        }
        let other = sample_potential(&cube(100), &cfg.realization(4)).unwrap();
        assert_ne!(a.values(), other.values());
    }

    #[test]
    fn bump_samples_stay_in_support_and_are_symmetric() {
        let cfg = DisorderConfig::new(SiteDistribution::SmoothBump { center: 0.5, halfwidth: 2.0 }, 1.5, 9).unwrap();
        let f = sample_potential(&cube(20000), &cfg).unwrap();
        let (a, b) = cfg.scaled_support();
        assert!(f.values().iter().all(|&v| v >= a && v <= b));
        let mean = f.values().iter().sum::<f64>() / f.values().len() as f64;
        assert!((mean - 0.75).abs() < 0.02, "mean {mean}");
        // the bump quantile is odd about u = 1/2
        assert!((bump_quantile(0.3) + bump_quantile(0.7)).abs() < 1e-6);
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(DisorderConfig::new(SiteDistribution::Uniform { lo: 1.0, hi: 1.0 }, 1.0, 0).is_err());
        assert!(DisorderConfig::new(SiteDistribution::SmoothBump { center: 0.0, halfwidth: 0.0 }, 1.0, 0).is_err());
        assert!(DisorderConfig::new(SiteDistribution::Uniform { lo: 0.0, hi: 1.0 }, -1.0, 0).is_err());
    }

    #[test]
    fn csv_and_binary_round_trip() {
        let parent = LatticeCube::with_origin(2, 4, Boundary::Periodic, vec![-2, 3]).unwrap();
        let f = sample_potential(&parent, &uniform(3.0, 11)).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = PotentialField::read_csv(buf.as_slice(), Boundary::Periodic).unwrap();
        assert_eq!(back.parent(), f.parent());
        for (x, y) in back.values().iter().zip(f.values()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        let mut bin = Vec::new();
        f.write_binary(&mut bin).unwrap();
        assert_eq!(PotentialField::read_binary(bin.as_slice()).unwrap(), f);
    }

    #[test]
    fn restrict_slices_absolute_coordinates() {
        let parent = LatticeCube::new(1, 9, Boundary::Periodic).unwrap();
        let f = PotentialField::from_values(parent, (0..9).map(|i| i as f64).collect()).unwrap();
        let sub = LatticeCube::with_origin(1, 3, Boundary::Dirichlet, vec![4]).unwrap();
        assert_eq!(f.restrict(&sub).unwrap(), vec![4.0, 5.0, 6.0]);
        let out = LatticeCube::with_origin(1, 3, Boundary::Dirichlet, vec![7]).unwrap();
        assert!(matches!(f.restrict(&out), Err(Error::OutOfBounds(_))));
    }
}
