use super::catalog::{FeatureCatalog, Formula, Point, Signal, Stat};
use super::fiducials::{detect_fiducials, FiducialSet};
use super::{derivative, moments, FeatureError};
use crate::dsp::{min_max, PulseCycle};

struct Context<'a> {
    x: &'a [f64],
    d1: Vec<f64>,
    d2: Vec<f64>,
    fs: f64,
    fid: &'a FiducialSet,
    moments: [[f64; 4]; 3],
}

impl Context<'_> {
    fn signal(&self, s: Signal) -> &[f64] {
        match s {
            Signal::Cycle => self.x,
            Signal::D1 => &self.d1,
            Signal::D2 => &self.d2,
        }
    }

    fn duration(&self) -> f64 {
        self.fid.end.t
    }

    /// Sample index and (refined) time of a landmark, `None` when absent.
    fn locate(&self, p: Point) -> Option<(usize, f64)> {
        let f = self.fid;
        let pick = |fd: &super::Fiducial| (fd.index, fd.t);
        Some(match p {
            Point::Onset => pick(&f.onset),
            Point::Peak => pick(&f.peak),
            Point::End => pick(&f.end),
            Point::Notch => pick(f.notch.as_ref()?),
            Point::DiastolicPeak => pick(f.diastolic_peak.as_ref()?),
            Point::D1Max => pick(&f.d1_max),
            Point::D1Min => pick(&f.d1_min),
            Point::D2A => pick(&f.d2_a),
            Point::D2B => pick(&f.d2_b),
            Point::D2E => pick(&f.d2_e),
            Point::D2Max => pick(&f.d2_max),
            Point::D2Min => pick(&f.d2_min),
            Point::Up(level) => self.crossing(level, true),
            Point::Down(level) => self.crossing(level, false),
        })
    }

    /// Interpolated crossing of `level × peak` nearest the peak.
    fn crossing(&self, level: f64, rising: bool) -> (usize, f64) {
        let x = self.x;
        let p = self.fid.peak.index;
        let h = level * self.fid.peak.v;
        let at = |t: f64| ((t * self.fs).round() as usize, t);
        if rising {
            for i in (1..=p).rev() {
                if x[i - 1] < h && x[i] >= h {
                    let frac = (h - x[i - 1]) / (x[i] - x[i - 1]);
                    return at((i - 1) as f64 / self.fs + frac / self.fs);
                }
            }
            (0, 0.0)
        } else {
            for i in p..x.len() - 1 {
                if x[i] >= h && x[i + 1] < h {
                    let frac = (x[i] - h) / (x[i] - x[i + 1]);
                    return at(i as f64 / self.fs + frac / self.fs);
                }
            }
            (x.len() - 1, self.duration())
        }
    }

    fn value(&self, s: Signal, p: Point) -> Option<f64> {
        let (i, _) = self.locate(p)?;
        Some(self.signal(s)[i])
    }

    fn area(&self, a: usize, b: usize) -> f64 {
        if b <= a {
            return 0.0;
        }
        let inner: f64 = self.x[a + 1..b].iter().sum();
        (inner + 0.5 * (self.x[a] + self.x[b])) / self.fs
    }

    fn eval(&self, f: &Formula) -> Option<f64> {
        let ratio = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };
        Some(match f {
            Formula::Value(s, p) => self.value(*s, *p)?,
            Formula::Interval(a, b) => self.locate(*b)?.1 - self.locate(*a)?.1,
            Formula::Diff(s, a, b) => self.value(*s, *b)? - self.value(*s, *a)?,
            Formula::Slope(s, a, b) => {
                let dt = self.locate(*b)?.1 - self.locate(*a)?.1;
                ratio(self.value(*s, *b)? - self.value(*s, *a)?, dt)
            }
            Formula::GridSlope(s, a, b) => {
                let (ia, ib) = (self.locate(*a)?.0, self.locate(*b)?.0);
                let dt = (ib as f64 - ia as f64) / self.fs;
                ratio(self.signal(*s)[ib] - self.signal(*s)[ia], dt)
            }
            Formula::Moment(s, m) => {
                let k = match m {
                    Stat::Mean => 0,
                    Stat::Std => 1,
                    Stat::Skewness => 2,
                    Stat::Kurtosis => 3,
                };
                self.moments[*s as usize][k]
            }
            Formula::Area(a, b) => self.area(self.locate(*a)?.0, self.locate(*b)?.0),
            Formula::NormalizedArea => ratio(
                self.area(0, self.x.len() - 1),
                self.fid.peak.v * self.duration(),
            ),
            Formula::NormalizedPower => {
                let ms = self.x.iter().map(|v| v * v).sum::<f64>() / self.x.len() as f64;
                ratio(ms, self.fid.peak.v * self.fid.peak.v)
            }
            Formula::HeartRate => ratio(60.0, self.duration()),
            Formula::NotchPresent => f64::from(u8::from(self.fid.notch.is_some())),
            Formula::Quotient(a, b) => ratio(self.eval(a)?, self.eval(b)?),
        })
    }
}

/// Evaluate every catalog entry on one cycle, in catalog order.
///
/// Features that need an absent notch are 0. Fails on cycles with zero
/// duration or amplitude range, a non-positive mean (PI undefined), or any
/// non-finite value.
pub fn compute_features(
    cycle: &PulseCycle,
    fiducials: &FiducialSet,
    catalog: &FeatureCatalog,
) -> Result<Vec<f64>, FeatureError> {
    let x = &cycle.samples;
    let fs = cycle.sample_rate_hz;
    if x.len() < 2 || !(fs > 0.0) {
        return Err(FeatureError::DegenerateCycle("zero duration".into()));
    }
    let (lo, hi) = min_max(x);
    if hi - lo == 0.0 {
        return Err(FeatureError::DegenerateCycle("zero amplitude range".into()));
    }
    let d1 = derivative(x, fs)?;
    let d2 = derivative(&d1, fs)?;
    let m = [moments(x), moments(&d1), moments(&d2)];
    if !(m[0][0] > 0.0) {
        return Err(FeatureError::DegenerateCycle("non-positive cycle mean".into()));
    }
    let ctx = Context {
        x,
        d1,
        d2,
        fs,
        fid: fiducials,
        moments: m,
    };
    catalog
        .defs
        .iter()
        .map(|def| {
            let v = ctx.eval(&def.formula).unwrap_or(0.0);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(FeatureError::DegenerateCycle(format!("{} is not finite", def.name)))
            }
        })
        .collect()
}

/// Detect fiducials and compute the catalog in one step.
pub fn extract_features(cycle: &PulseCycle, catalog: &FeatureCatalog) -> Result<Vec<f64>, FeatureError> {
    let fiducials = detect_fiducials(cycle)?;
    compute_features(cycle, &fiducials, catalog)
}
