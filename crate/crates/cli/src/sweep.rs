//! Sweep grids: path substitution into raw job JSON, Cartesian expansion in
//! lexicographic order, and the monotone-trend summary.

use serde_json::{Map, Value};

use crate::schema::{AxisSpec, FieldError, SweepSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub path: String,
    segments: Vec<Segment>,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq)]
enum Segment {
    Key(String),
    Index(usize),
}

fn parse_path(path: &str) -> Option<Vec<Segment>> {
    let mut out = Vec::new();
    for part in path.split('.') {
        let (key, mut rest) = match part.find('[') {
            Some(i) => (&part[..i], &part[i..]),
            None => (part, ""),
        };
        if key.is_empty() && out.is_empty() {
            return None;
        }
        if !key.is_empty() {
            match key.parse::<usize>() {
                Ok(i) => out.push(Segment::Index(i)),
                Err(_) => out.push(Segment::Key(key.to_string())),
            }
        }
        while !rest.is_empty() {
            let close = rest.find(']')?;
            out.push(Segment::Index(rest[1..close].parse().ok()?));
            rest = &rest[close + 1..];
            if !rest.is_empty() && !rest.starts_with('[') {
                return None;
            }
        }
    }
    (!out.is_empty()).then_some(out)
}

impl Axis {
    pub fn from_spec(spec: &AxisSpec, base: &str) -> Result<Self, FieldError> {
        let segments = parse_path(&spec.path)
            .ok_or_else(|| FieldError::new(format!("{base}.path"), format!("malformed field path {:?}", spec.path)))?;
        let values = match (&spec.values, spec.from, spec.to, spec.steps) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(from), Some(to), Some(steps)) => {
                if steps == 0 {
                    return Err(FieldError::new(format!("{base}.steps"), "steps must be at least 1"));
                }
                if !(from.is_finite() && to.is_finite()) {
                    return Err(FieldError::new(base, "from and to must be finite"));
                }
                (0..steps)
                    .map(|i| {
                        let x = if steps == 1 {
                            from
                        } else if i == steps - 1 {
                            to
                        } else {
                            from + (to - from) * i as f64 / (steps - 1) as f64
                        };
                        Value::from(x)
                    })
                    .collect()
            }
            _ => {
                return Err(FieldError::new(
                    base,
                    "an axis takes either `values` or all of `from`, `to`, `steps`",
                ))
            }
        };
        if values.is_empty() {
            return Err(FieldError::new(format!("{base}.values"), "at least one value is required"));
        }
        Ok(Self {
            path: spec.path.clone(),
            segments,
            values,
        })
    }

    /// Writes `value` at this axis' path; objects along the way are created,
    /// array elements must already exist.
    pub fn apply(&self, job: &mut Value, value: &Value) -> Result<(), String> {
        let mut cur = job;
        let last = self.segments.len() - 1;
        for (i, seg) in self.segments.iter().enumerate() {
            cur = match seg {
                Segment::Key(k) => {
                    if cur.is_null() {
                        *cur = Value::Object(Map::new());
                    }
                    let obj = cur
                        .as_object_mut()
                        .ok_or_else(|| format!("cannot descend into non-object at {k:?}"))?;
                    if i == last {
                        obj.insert(k.clone(), value.clone());
                        return Ok(());
                    }
                    obj.entry(k.clone()).or_insert(Value::Null)
                }
                Segment::Index(n) => {
                    let arr = cur
                        .as_array_mut()
                        .ok_or_else(|| format!("cannot index non-array with [{n}]"))?;
                    let len = arr.len();
                    let slot = arr
                        .get_mut(*n)
                        .ok_or_else(|| format!("index [{n}] out of range for array of length {len}"))?;
                    if i == last {
                        *slot = value.clone();
                        return Ok(());
                    }
                    slot
                }
            };
        }
        Ok(())
    }
}

pub fn axes(spec: &SweepSpec) -> Result<Vec<Axis>, FieldError> {
    let list = spec.axes();
    let single = matches!(spec, SweepSpec::Axis(_));
    if list.is_empty() {
        return Err(FieldError::new("sweep", "at least one axis is required"));
    }
    let axes = list
        .iter()
        .enumerate()
        .map(|(i, a)| Axis::from_spec(a, &if single { "sweep".to_string() } else { format!("sweep[{i}]") }))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, a) in axes.iter().enumerate() {
        if axes[..i].iter().any(|b| b.path == a.path) {
            return Err(FieldError::new(format!("sweep[{i}].path"), format!("duplicate axis {:?}", a.path)));
        }
    }
    Ok(axes)
}

/// Index tuples of the Cartesian grid, first axis slowest.
pub fn grid(axes: &[Axis]) -> Vec<Vec<usize>> {
    let mut cells = vec![Vec::new()];
    for a in axes {
        cells = cells
            .into_iter()
            .flat_map(|prefix| {
                (0..a.values.len()).map(move |j| {
                    let mut c = prefix.clone();
                    c.push(j);
                    c
                })
            })
            .collect();
    }
    cells
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    Constant,
    Nondecreasing,
    Nonincreasing,
    Mixed,
}

impl Trend {
    pub fn of(values: &[f64]) -> Trend {
        let up = values.windows(2).all(|w| w[1] >= w[0]);
        let down = values.windows(2).all(|w| w[1] <= w[0]);
        match (up, down) {
            (true, true) => Trend::Constant,
            (true, false) => Trend::Nondecreasing,
            (false, true) => Trend::Nonincreasing,
            (false, false) => Trend::Mixed,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Trend::Constant => "constant",
            Trend::Nondecreasing => "nondecreasing",
            Trend::Nonincreasing => "nonincreasing",
            Trend::Mixed => "mixed",
        }
    }
}

/// For each axis, the trend of `values` (laid out in `grid` order) along
/// every line parallel to that axis.
pub fn trends(axes: &[Axis], values: &[f64]) -> Vec<Vec<Trend>> {
    let sizes: Vec<usize> = axes.iter().map(|a| a.values.len()).collect();
    let strides: Vec<usize> = (0..sizes.len()).map(|k| sizes[k + 1..].iter().product()).collect();
    (0..axes.len())
        .map(|k| {
            let (n, stride) = (sizes[k], strides[k]);
            (0..values.len())
                .filter(|&start| (start / stride) % n == 0)
                .map(|start| {
                    let line: Vec<f64> = (0..n).map(|j| values[start + j * stride]).collect();
                    Trend::of(&line)
                })
                .collect()
        })
        .collect()
}
