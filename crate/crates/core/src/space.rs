//! Search spaces over the unit cube and persisted trial archives.
//!
//! Optimizers only ever see points in `[0,1]^d`. A [`ParameterSpace`] maps
//! such a point to user-facing parameter values (linear, log, integer).

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const ARCHIVE_MAGIC: &str = "#ws-archive v1";
const SPACE_PREFIX: &str = "#space ";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl Scale {
    fn as_str(self) -> &'static str {
        match self {
            Scale::Linear => "linear",
            Scale::Log => "log",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "linear" => Some(Scale::Linear),
            "log" => Some(Scale::Log),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec<T> {
    name: String,
    scale: Scale,
    lower: T,
    upper: T,
    integer: bool,
}

impl<T: Scalar> ParamSpec<T> {
    pub fn new(name: impl Into<String>, scale: Scale, lower: T, upper: T, integer: bool) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || name.contains([':', ';', ',', '\n', '\r']) || name.trim() != name {
            return Err(Error::InvalidSpace(format!("bad parameter name {name:?}")));
        }
        if !(lower.is_finite() && upper.is_finite()) || lower >= upper {
            return Err(Error::InvalidSpace(format!("{name}: need finite lower < upper, got [{lower}, {upper}]")));
        }
        if scale == Scale::Log && lower <= T::zero() {
            return Err(Error::InvalidSpace(format!("{name}: log scale needs lower > 0")));
        }
        Ok(Self { name, scale, lower, upper, integer })
    }

    pub fn linear(name: impl Into<String>, lower: T, upper: T) -> Result<Self> {
        Self::new(name, Scale::Linear, lower, upper, false)
    }

    pub fn log(name: impl Into<String>, lower: T, upper: T) -> Result<Self> {
        Self::new(name, Scale::Log, lower, upper, false)
    }

    pub fn integer(mut self) -> Self {
        self.integer = true;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn lower(&self) -> T {
        self.lower
    }

    pub fn upper(&self) -> T {
        self.upper
    }

    pub fn is_integer(&self) -> bool {
        self.integer
    }

    /// Maps one unit coordinate to the parameter's range.
    ///
    /// Exact at the endpoints and monotone in `u`: the scaled value is clamped
    /// into `[lower, upper]` so rounding can never overshoot an endpoint.
    pub fn to_external(&self, u: T) -> T {
        let v = if u <= T::zero() {
            self.lower
        } else if u >= T::one() {
            self.upper
        } else {
            let raw = match self.scale {
                Scale::Linear => self.lower + u * (self.upper - self.lower),
                Scale::Log => {
                    let (lo, hi) = (self.lower.ln(), self.upper.ln());
                    (lo + u * (hi - lo)).exp()
                }
            };
            raw.max(self.lower).min(self.upper)
        };
        // f64::round is half-away-from-zero.
        if self.integer {
            v.round()
        } else {
            v
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSpace<T> {
    specs: Vec<ParamSpec<T>>,
}

impl<T: Scalar> ParameterSpace<T> {
    pub fn new(specs: Vec<ParamSpec<T>>) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::InvalidSpace("at least one parameter is required".into()));
        }
        let mut seen = HashSet::new();
        for s in &specs {
            if !seen.insert(s.name.as_str()) {
                return Err(Error::InvalidSpace(format!("duplicate parameter name {}", s.name)));
            }
        }
        Ok(Self { specs })
    }

    /// `x1..xd`, each linear on `[0, 1]`.
    pub fn unit_cube(dim: usize) -> Result<Self> {
        let specs =
            (1..=dim).map(|i| ParamSpec::linear(format!("x{i}"), T::zero(), T::one())).collect::<Result<Vec<_>>>()?;
        Self::new(specs)
    }

    pub fn dim(&self) -> usize {
        self.specs.len()
    }

    pub fn specs(&self) -> &[ParamSpec<T>] {
        &self.specs
    }

    pub fn to_external(&self, u: &[T]) -> Result<Vec<(String, T)>> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: u.len() });
        }
        if let Some(bad) = u.iter().find(|x| !(**x >= T::zero() && **x <= T::one())) {
            return Err(Error::InvalidTrial(format!("unit coordinate {bad} outside [0, 1]")));
        }
        Ok(self.specs.iter().zip(u).map(|(s, &ui)| (s.name.clone(), s.to_external(ui))).collect())
    }

    fn header_line(&self) -> String {
        let mut out = String::from(SPACE_PREFIX);
        for (i, s) in self.specs.iter().enumerate() {
            if i > 0 {
                out.push(';');
            }
            let _ = write!(
                out,
                "{}:{}:{}:{}:{}",
                s.name,
                s.scale.as_str(),
                s.lower.to_decimal(),
                s.upper.to_decimal(),
                u8::from(s.integer)
            );
        }
        out
    }

    fn parse_header(line: &str, line_no: usize) -> Result<Self> {
        let perr = |message: String| Error::Parse { line: line_no, message };
        let body = line
            .strip_prefix(SPACE_PREFIX)
            .ok_or_else(|| perr(format!("expected `{}` line", SPACE_PREFIX.trim_end())))?;
        let mut specs = Vec::new();
        for item in body.split(';') {
            let fields: Vec<&str> = item.split(':').collect();
            let [name, scale, lower, upper, int_flag] = fields[..] else {
                return Err(perr(format!("bad parameter entry {item:?}")));
            };
            let scale = Scale::parse(scale).ok_or_else(|| perr(format!("unknown scale {scale:?}")))?;
            let lower = T::parse_decimal(lower).ok_or_else(|| perr(format!("bad lower bound {lower:?}")))?;
            let upper = T::parse_decimal(upper).ok_or_else(|| perr(format!("bad upper bound {upper:?}")))?;
            let integer = match int_flag {
                "0" => false,
                "1" => true,
                other => return Err(perr(format!("bad integer flag {other:?}"))),
            };
            specs.push(ParamSpec::new(name, scale, lower, upper, integer).map_err(|e| perr(e.to_string()))?);
        }
        Self::new(specs).map_err(|e| perr(e.to_string()))
    }
}

/// One evaluated point. Lower values are better.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial<T> {
    pub unit_point: Vec<T>,
    pub value: T,
    pub run_id: String,
    pub eval_index: u64,
}

impl<T: Scalar> Trial<T> {
    pub fn new(unit_point: Vec<T>, value: T, run_id: impl Into<String>, eval_index: u64) -> Result<Self> {
        let run_id = run_id.into();
        if run_id.contains([',', '\n', '\r']) || run_id.starts_with('#') {
            return Err(Error::InvalidTrial(format!("run id {run_id:?} cannot be stored")));
        }
        if let Some(bad) = unit_point.iter().find(|x| !(**x >= T::zero() && **x <= T::one())) {
            return Err(Error::InvalidTrial(format!("coordinate {bad} outside [0, 1]")));
        }
        if !value.is_finite() {
            return Err(Error::InvalidTrial(format!("objective value {value} is not finite")));
        }
        Ok(Self { unit_point, value, run_id, eval_index })
    }

    pub fn dim(&self) -> usize {
        self.unit_point.len()
    }
}

/// Evaluated trials over a fixed space; the persisted source-task knowledge.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialArchive<T> {
    space: ParameterSpace<T>,
    trials: Vec<Trial<T>>,
}

impl<T: Scalar> TrialArchive<T> {
    pub fn new(space: ParameterSpace<T>) -> Self {
        Self { space, trials: Vec::new() }
    }

    pub fn with_trials(space: ParameterSpace<T>, trials: Vec<Trial<T>>) -> Result<Self> {
        let mut archive = Self::new(space);
        for t in trials {
            archive.push(t)?;
        }
        Ok(archive)
    }

    pub fn push(&mut self, trial: Trial<T>) -> Result<()> {
        if trial.dim() != self.space.dim() {
            return Err(Error::DimensionMismatch { expected: self.space.dim(), got: trial.dim() });
        }
        self.trials.push(trial);
        Ok(())
    }

    pub fn space(&self) -> &ParameterSpace<T> {
        &self.space
    }

    pub fn trials(&self) -> &[Trial<T>] {
        &self.trials
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{ARCHIVE_MAGIC} d={}", self.dim())?;
        writeln!(out, "{}", self.space.header_line())?;
        let mut line = String::new();
        for t in &self.trials {
            line.clear();
            let _ = write!(line, "{},{}", t.run_id, t.eval_index);
            for u in &t.unit_point {
                let _ = write!(line, ",{}", u.to_decimal());
            }
            let _ = write!(line, ",{}", t.value.to_decimal());
            writeln!(out, "{line}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(input: R) -> Result<Self> {
        let mut lines = BufReader::new(input).lines();
        let mut next_line = |line_no: usize| -> Result<String> {
            lines.next().transpose()?.ok_or(Error::Parse { line: line_no, message: "unexpected end of file".into() })
        };

        let magic = next_line(1)?;
        let dim: usize = magic
            .strip_prefix(ARCHIVE_MAGIC)
            .and_then(|rest| rest.trim().strip_prefix("d="))
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| Error::Parse { line: 1, message: format!("expected `{ARCHIVE_MAGIC} d=<dim>`") })?;
        let space = ParameterSpace::parse_header(&next_line(2)?, 2)?;
        if space.dim() != dim {
            return Err(Error::Parse {
                line: 2,
                message: format!("space has {} parameters but header says d={dim}", space.dim()),
            });
        }

        let mut archive = Self::new(space);
        for (i, line) in lines.enumerate() {
            let line_no = i + 3;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let trial = parse_record::<T>(&line, dim).map_err(|message| Error::Parse { line: line_no, message })?;
            archive.trials.push(trial);
        }
        Ok(archive)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(fs::File::open(path)?)
    }
}

fn parse_record<T: Scalar>(line: &str, dim: usize) -> std::result::Result<Trial<T>, String> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != dim + 3 {
        return Err(format!("expected {} fields for d={dim}, found {}", dim + 3, fields.len()));
    }
    let eval_index: u64 = fields[1].parse().map_err(|_| format!("bad eval index {:?}", fields[1]))?;
    let num = |s: &str| T::parse_decimal(s).ok_or_else(|| format!("non-numeric field {s:?}"));
    let unit_point = fields[2..2 + dim].iter().map(|s| num(s)).collect::<std::result::Result<Vec<_>, _>>()?;
    let value = num(fields[dim + 2])?;
    Trial::new(unit_point, value, fields[0], eval_index).map_err(|e| e.to_string())
}
