//! Generating units, grid instances and hourly load profiles.
//!
//! Cost coefficients follow the usual quadratic heat-rate model
//! `F(p) = a p^2 + b p + c` with `a` in $/MW²h, `b` in $/MWh and `c` in $/h.
//! Coefficients are time-invariant.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One generating unit: output limits and quadratic cost coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub index: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl GeneratorSpec {
    /// Operating cost at output `p`.
    pub fn cost(&self, p: f64) -> f64 {
        self.a * p * p + self.b * p + self.c
    }

    /// Incremental cost `dF/dp` at output `p`.
    pub fn marginal_cost(&self, p: f64) -> f64 {
        2.0 * self.a * p + self.b
    }

    /// Cost of running the unit at its minimum output.
    pub fn min_cost(&self) -> f64 {
        self.cost(self.p_min)
    }

    fn validate(&self) -> Result<()> {
        let fail = |message: String| {
            Err(Error::InvalidUnit {
                unit: self.index,
                message,
            })
        };
        let finite = [self.p_min, self.p_max, self.a, self.b, self.c]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return fail("non-finite value".into());
        }
        if self.p_min <= 0.0 {
            return fail(format!("pmin must be positive, got {}", self.p_min));
        }
        if self.p_min > self.p_max {
            return fail(format!("pmin {} exceeds pmax {}", self.p_min, self.p_max));
        }
        if self.a <= 0.0 {
            return fail(format!(
                "quadratic coefficient must be positive for strictly convex dispatch, got {}",
                self.a
            ));
        }
        Ok(())
    }
}

/// An ordered set of generating units. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridInstance {
    name: String,
    units: Vec<GeneratorSpec>,
}

impl GridInstance {
    pub fn new(name: impl Into<String>, units: Vec<GeneratorSpec>) -> Result<Self> {
        if units.is_empty() {
            return Err(Error::InvalidUnit {
                unit: 0,
                message: "instance has no units".into(),
            });
        }
        if units.len() > 64 {
            return Err(Error::InvalidUnit {
                unit: 64,
                message: "at most 64 units are supported".into(),
            });
        }
        for (pos, unit) in units.iter().enumerate() {
            if unit.index != pos {
                return Err(Error::InvalidUnit {
                    unit: unit.index,
                    message: format!("unit index must match its position {pos}"),
                });
            }
            unit.validate()?;
        }
        Ok(Self {
            name: name.into(),
            units,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn units(&self) -> &[GeneratorSpec] {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn total_capacity(&self) -> f64 {
        self.units.iter().map(|u| u.p_max).sum()
    }

    /// Unit indices in ascending `F(pmin)/pmax` order, ties by index.
    pub fn ratio_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.units.len()).collect();
        order.sort_by(|&i, &j| {
            let ri = self.units[i].min_cost() / self.units[i].p_max;
            let rj = self.units[j].min_cost() / self.units[j].p_max;
            ri.total_cmp(&rj).then(i.cmp(&j))
        });
        order
    }

    /// Parse the `unit,pmin,pmax,c,b,a` CSV format.
    pub fn from_csv<R: Read>(name: impl Into<String>, source: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(source);
        let headers = reader.headers()?.clone();
        let expected = ["unit", "pmin", "pmax", "c", "b", "a"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Parse {
                row: 1,
                column: headers.iter().collect::<Vec<_>>().join(","),
                message: format!("expected header `{}`", expected.join(",")),
            });
        }
        let mut units = Vec::new();
        for row in reader.deserialize::<UnitRow>() {
            let row = row.map_err(|e| locate(e, &headers))?;
            units.push(GeneratorSpec {
                index: row.unit,
                p_min: row.pmin,
                p_max: row.pmax,
                a: row.a,
                b: row.b,
                c: row.c,
            });
        }
        Self::new(name, units)
    }

    /// Write the instance in the same CSV format [`GridInstance::from_csv`] reads.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(sink);
        for u in &self.units {
            writer.serialize(UnitRow {
                unit: u.index,
                pmin: u.p_min,
                pmax: u.p_max,
                c: u.c,
                b: u.b,
                a: u.a,
            })?;
        }
        writer.flush()?;
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct UnitRow {
    unit: usize,
    pmin: f64,
    pmax: f64,
    c: f64,
    b: f64,
    a: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct LoadRow {
    period: usize,
    load: f64,
}

fn locate(err: csv::Error, headers: &csv::StringRecord) -> Error {
    let (row, column) = match err.kind() {
        csv::ErrorKind::Deserialize { pos, err: de } => {
            let column = de
                .field()
                .and_then(|f| headers.get(f as usize))
                .unwrap_or("?")
                .to_string();
            (pos.as_ref().map_or(0, |p| p.line()), column)
        }
        csv::ErrorKind::UnequalLengths { pos, .. } => {
            (pos.as_ref().map_or(0, |p| p.line()), "*".to_string())
        }
        _ => (0, "?".to_string()),
    };
    Error::Parse {
        row,
        column,
        message: err.to_string(),
    }
}

/// Hourly loads `ℓ^t`, one per period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadProfile {
    loads: Vec<f64>,
}

impl LoadProfile {
    pub fn new(loads: Vec<f64>) -> Result<Self> {
        if let Some((t, l)) = loads
            .iter()
            .enumerate()
            .find(|(_, l)| !(l.is_finite() && **l > 0.0))
        {
            return Err(Error::InvalidProfile(format!(
                "load at period {t} must be positive, got {l}"
            )));
        }
        Ok(Self { loads })
    }

    pub fn loads(&self) -> &[f64] {
        &self.loads
    }

    pub fn len(&self) -> usize {
        self.loads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loads.is_empty()
    }

    /// Every load must be coverable by the instance's total capacity.
    pub fn check_against(&self, instance: &GridInstance) -> Result<()> {
        let capacity = instance.total_capacity();
        match self.loads.iter().position(|&l| l > capacity) {
            Some(t) => Err(Error::InvalidProfile(format!(
                "load {} MW at period {t} exceeds total capacity {capacity} MW of `{}`",
                self.loads[t],
                instance.name()
            ))),
            None => Ok(()),
        }
    }

    /// Parse the `period,load` CSV format. Periods must run 0..T-1 in order.
    pub fn from_csv<R: Read>(source: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(source);
        let headers = reader.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["period", "load"] {
            return Err(Error::Parse {
                row: 1,
                column: headers.iter().collect::<Vec<_>>().join(","),
                message: "expected header `period,load`".into(),
            });
        }
        let mut loads = Vec::new();
        for (expected, row) in reader.deserialize::<LoadRow>().enumerate() {
            let row = row.map_err(|e| locate(e, &headers))?;
            if row.period != expected {
                return Err(Error::Parse {
                    row: expected as u64 + 2,
                    column: "period".into(),
                    message: format!("expected period {expected}, got {}", row.period),
                });
            }
            loads.push(row.load);
        }
        Self::new(loads)
    }

    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(sink);
        for (period, &load) in self.loads.iter().enumerate() {
            writer.serialize(LoadRow { period, load })?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Names accepted by [`builtin_instance`].
pub const BUILTIN_NAMES: [&str; 3] = ["uc3", "uc10", "uc26"];

/// The 3-, 10- and 26-unit benchmark grids with their hourly load profiles.
pub fn builtin_instance(name: &str) -> Result<(GridInstance, LoadProfile)> {
    let (units, loads) = match name {
        "uc3" => (
            include_str!("../data/uc3.csv"),
            include_str!("../data/uc3_loads.csv"),
        ),
        "uc10" => (
            include_str!("../data/uc10.csv"),
            include_str!("../data/uc10_loads.csv"),
        ),
        "uc26" => (
            include_str!("../data/uc26.csv"),
            include_str!("../data/uc26_loads.csv"),
        ),
        other => return Err(Error::UnknownInstance(other.to_string())),
    };
    let instance = GridInstance::from_csv(name, units.as_bytes())?;
    let profile = LoadProfile::from_csv(loads.as_bytes())?;
    profile.check_against(&instance)?;
    Ok((instance, profile))
}
