//! Parameter sweeps over screen phases and time, and their CSV encoding.
//!
//! Every file starts with a `# meta:` comment line, then a one-line header,
//! then rows. Values are written with 17 significant digits so parsing the
//! text recovers the computed `f64` exactly.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interference::{
    intensity_joint_ent_closed, intensity_joint_sep_closed, ratio_ent_closed, ratio_sep_closed,
    ModeParams, PreparedExperiment,
};
use crate::states::TwoModeState;
use crate::weyl::Evaluator;

/// Quantity sampled on a screen grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    ISep,
    RSep,
    REnt,
    IEnt,
    INumeric,
    RNumeric,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Self::ISep,
        Self::RSep,
        Self::REnt,
        Self::IEnt,
        Self::INumeric,
        Self::RNumeric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::ISep => "i-sep",
            Self::RSep => "r-sep",
            Self::REnt => "r-ent",
            Self::IEnt => "i-ent",
            Self::INumeric => "i-numeric",
            Self::RNumeric => "r-numeric",
        }
    }

    /// Whether the quantity is a trace against the configured state rather
    /// than a closed form.
    pub fn is_numeric(self) -> bool {
        matches!(self, Self::INumeric | Self::RNumeric)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|q| q.name()).collect();
                Error::InvalidArgument(format!("unknown quantity {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// Formats with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Ordered `key=value` pairs written as the `# meta:` line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Meta(pub Vec<(String, String)>);

impl Meta {
    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.0.push((key.to_string(), value.into()));
    }

    pub fn push_f64(&mut self, key: &str, value: f64) {
        self.push(key, fmt_f64(value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn write<W: Write + ?Sized>(&self, w: &mut W) -> io::Result<()> {
        write!(w, "# meta:")?;
        for (k, v) in &self.0 {
            write!(w, " {k}={v}")?;
        }
        writeln!(w)
    }
}

/// Everything a sweep needs besides its axes.
#[derive(Debug, Clone)]
pub struct ScanSetup {
    pub mode_a: ModeParams,
    pub mode_b: ModeParams,
    pub state: TwoModeState,
    pub time: f64,
    pub evaluator: Evaluator,
}

impl ScanSetup {
    /// Shared coupling for the closed forms. Both modes must agree.
    pub fn q(&self) -> Result<f64> {
        let (qa, qb) = (self.mode_a.q(), self.mode_b.q());
        if qa != qb {
            return Err(Error::InvalidArgument(format!(
                "closed forms need equal coupling in both modes, got {qa} and {qb}"
            )));
        }
        Ok(qa)
    }

    fn base_meta(&self, quantity: &str, time: f64, trunc_dim: usize) -> Meta {
        let mut m = Meta::default();
        m.push("quantity", quantity);
        m.push("state", self.state.label());
        m.push_f64("q", self.mode_a.q());
        m.push_f64("xi", self.mode_a.xi());
        m.push_f64("omega1", self.mode_a.omega());
        m.push_f64("omega2", self.mode_b.omega());
        m.push_f64("t", time);
        m.push("dim", trunc_dim.to_string());
        m
    }
}

/// A quantity sampled on `axis_a × axis_b`, row-major with `σ_A` slow.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeGrid {
    pub axis_a: Vec<f64>,
    pub axis_b: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: Meta,
}

impl FringeGrid {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axis_b.len() + j]
    }

    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W) -> io::Result<()> {
        self.meta.write(w)?;
        writeln!(w, "sigma_a,sigma_b,value")?;
        for (i, a) in self.axis_a.iter().enumerate() {
            for (j, b) in self.axis_b.iter().enumerate() {
                writeln!(w, "{},{},{}", fmt_f64(*a), fmt_f64(*b), fmt_f64(self.get(i, j)))?;
            }
        }
        Ok(())
    }
}

fn point_value(
    quantity: Quantity,
    setup: &ScanSetup,
    prepared: Option<&PreparedExperiment>,
    q: f64,
    a: f64,
    b: f64,
) -> Result<f64> {
    let (w1, w2, t) = (setup.mode_a.omega(), setup.mode_b.omega(), setup.time);
    match quantity {
        Quantity::ISep => Ok(intensity_joint_sep_closed(a, b, q)),
        Quantity::IEnt => Ok(intensity_joint_ent_closed(a, b, q, w1, w2, t)),
        Quantity::RSep => ratio_sep_closed(a, b, q),
        Quantity::REnt => ratio_ent_closed(a, b, q, w1, w2, t),
        Quantity::INumeric => prepared.expect("prepared numeric experiment").joint(a, b),
        Quantity::RNumeric => prepared.expect("prepared numeric experiment").ratio(a, b),
    }
}

/// Samples `quantity` on the grid. Rows are computed in parallel and
/// assembled in axis order.
pub fn compute_grid(quantity: Quantity, setup: &ScanSetup, axis_a: &[f64], axis_b: &[f64]) -> Result<FringeGrid> {
    if axis_a.len() < 2 || axis_b.len() < 2 {
        return Err(Error::InvalidArgument("grid needs at least 2 samples per axis".into()));
    }
    let prepared = if quantity.is_numeric() {
        Some(PreparedExperiment::from_state(
            &setup.state,
            &setup.mode_a,
            &setup.mode_b,
            setup.time,
            &setup.evaluator,
        )?)
    } else {
        None
    };
    let q = if quantity.is_numeric() { setup.mode_a.q() } else { setup.q()? };
    let rows: Vec<Vec<f64>> = axis_a
        .par_iter()
        .map(|&a| {
            axis_b
                .iter()
                .map(|&b| point_value(quantity, setup, prepared.as_ref(), q, a, b))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let dim = prepared
        .as_ref()
        .map(|p| p.trunc_dim())
        .unwrap_or_else(|| setup.state.dim_a().max(setup.state.dim_b()));
    Ok(FringeGrid {
        axis_a: axis_a.to_vec(),
        axis_b: axis_b.to_vec(),
        values: rows.into_iter().flatten().collect(),
        meta: setup.base_meta(quantity.name(), setup.time, dim),
    })
}

/// `R_sep` and `R_ent` along `σ_A` at fixed `σ_B` and time.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub sigma_b: f64,
    pub sigma_a: Vec<f64>,
    pub r_sep: Vec<f64>,
    pub r_ent: Vec<f64>,
    pub meta: Meta,
}

impl Slice {
    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W) -> io::Result<()> {
        self.meta.write(w)?;
        writeln!(w, "sigma_a,r_sep,r_ent")?;
        for k in 0..self.sigma_a.len() {
            writeln!(
                w,
                "{},{},{}",
                fmt_f64(self.sigma_a[k]),
                fmt_f64(self.r_sep[k]),
                fmt_f64(self.r_ent[k])
            )?;
        }
        Ok(())
    }
}

pub fn compute_slice(setup: &ScanSetup, axis_a: &[f64], sigma_b: f64) -> Result<Slice> {
    if axis_a.len() < 2 {
        return Err(Error::InvalidArgument("slice needs at least 2 samples".into()));
    }
    let q = setup.q()?;
    let (w1, w2, t) = (setup.mode_a.omega(), setup.mode_b.omega(), setup.time);
    let pairs: Vec<(f64, f64)> = axis_a
        .par_iter()
        .map(|&a| Ok((ratio_sep_closed(a, sigma_b, q)?, ratio_ent_closed(a, sigma_b, q, w1, w2, t)?)))
        .collect::<Result<_>>()?;
    let mut meta = setup.base_meta("slice", t, setup.state.dim_a().max(setup.state.dim_b()));
    meta.push_f64("sigma_b", sigma_b);
    let (r_sep, r_ent) = pairs.into_iter().unzip();
    Ok(Slice {
        sigma_b,
        sigma_a: axis_a.to_vec(),
        r_sep,
        r_ent,
        meta,
    })
}

/// `R_sep` and `R_ent` against time at fixed screen point.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub times: Vec<f64>,
    pub r_sep: Vec<f64>,
    pub r_ent: Vec<f64>,
    pub meta: Meta,
}

impl TimeSeries {
    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W) -> io::Result<()> {
        self.meta.write(w)?;
        writeln!(w, "time,r_sep,r_ent")?;
        for k in 0..self.times.len() {
            writeln!(
                w,
                "{},{},{}",
                fmt_f64(self.times[k]),
                fmt_f64(self.r_sep[k]),
                fmt_f64(self.r_ent[k])
            )?;
        }
        Ok(())
    }
}

/// `samples` uniform times `t_start + k (t_end − t_start)/samples`,
/// `k = 0..samples` (end point excluded, so a window of whole periods
/// averages a sinusoid to zero).
pub fn sample_times(t_start: f64, t_end: f64, samples: usize) -> Result<Vec<f64>> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 time samples, got {samples}")));
    }
    if !(t_end > t_start) || !t_start.is_finite() || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "time range must be finite and increasing, got [{t_start}, {t_end})"
        )));
    }
    let dt = (t_end - t_start) / samples as f64;
    let times: Vec<f64> = (0..samples).map(|k| t_start + k as f64 * dt).collect();
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("time samples are not strictly increasing".into()));
    }
    Ok(times)
}

pub fn compute_time_series(
    setup: &ScanSetup,
    sigma_a: f64,
    sigma_b: f64,
    t_start: f64,
    t_end: f64,
    samples: usize,
) -> Result<TimeSeries> {
    let q = setup.q()?;
    let (w1, w2) = (setup.mode_a.omega(), setup.mode_b.omega());
    let times = sample_times(t_start, t_end, samples)?;
    let pairs: Vec<(f64, f64)> = times
        .par_iter()
        .map(|&t| Ok((ratio_sep_closed(sigma_a, sigma_b, q)?, ratio_ent_closed(sigma_a, sigma_b, q, w1, w2, t)?)))
        .collect::<Result<_>>()?;
    let mut meta = setup.base_meta("timeseries", t_start, setup.state.dim_a().max(setup.state.dim_b()));
    meta.push_f64("t_end", t_end);
    meta.push_f64("sigma_a", sigma_a);
    meta.push_f64("sigma_b", sigma_b);
    let (r_sep, r_ent) = pairs.into_iter().unzip();
    Ok(TimeSeries {
        sigma_a,
        sigma_b,
        times,
        r_sep,
        r_ent,
        meta,
    })
}
