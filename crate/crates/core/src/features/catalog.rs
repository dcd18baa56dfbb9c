use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    Cycle,
    D1,
    D2,
}

impl Signal {
    fn name(self) -> &'static str {
        match self {
            Signal::Cycle => "cycle",
            Signal::D1 => "d1",
            Signal::D2 => "d2",
        }
    }

    /// Power of seconds in the signal's unit (amplitude / s^k).
    fn time_power(self) -> i32 {
        match self {
            Signal::Cycle => 0,
            Signal::D1 => -1,
            Signal::D2 => -2,
        }
    }
}

/// Landmarks a formula can refer to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Point {
    Onset,
    Peak,
    End,
    Notch,
    DiastolicPeak,
    D1Max,
    D1Min,
    D2A,
    D2B,
    D2E,
    D2Max,
    D2Min,
    /// Last upward crossing of `level × peak` before the peak.
    Up(f64),
    /// First downward crossing of `level × peak` after the peak.
    Down(f64),
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Onset => f.write_str("onset"),
            Point::Peak => f.write_str("peak"),
            Point::End => f.write_str("end"),
            Point::Notch => f.write_str("notch"),
            Point::DiastolicPeak => f.write_str("diastolic_peak"),
            Point::D1Max => f.write_str("d1_max"),
            Point::D1Min => f.write_str("d1_min"),
            Point::D2A => f.write_str("d2_a"),
            Point::D2B => f.write_str("d2_b"),
            Point::D2E => f.write_str("d2_e"),
            Point::D2Max => f.write_str("d2_max"),
            Point::D2Min => f.write_str("d2_min"),
            Point::Up(l) => write!(f, "up({l})"),
            Point::Down(l) => write!(f, "down({l})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stat {
    Mean,
    Std,
    Skewness,
    Kurtosis,
}

/// How a feature is computed. Times of extrema are sub-sample refined;
/// `GridSlope` uses the sample grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    /// Signal value at a landmark.
    Value(Signal, Point),
    /// `t(b) - t(a)`.
    Interval(Point, Point),
    /// `v(b) - v(a)` on one signal.
    Diff(Signal, Point, Point),
    /// `(v(b) - v(a)) / (t(b) - t(a))` with refined times.
    Slope(Signal, Point, Point),
    /// Same on sample-grid times.
    GridSlope(Signal, Point, Point),
    Moment(Signal, Stat),
    /// Trapezoidal area of the cycle between two landmarks.
    Area(Point, Point),
    /// Total area over `peak × duration`.
    NormalizedArea,
    /// Mean square over `peak²`.
    NormalizedPower,
    /// `60 / duration`.
    HeartRate,
    NotchPresent,
    Quotient(Box<Formula>, Box<Formula>),
}

impl Formula {
    /// Physical dimension as powers of amplitude and seconds.
    pub fn dimension(&self) -> Dimension {
        let sig = |s: &Signal| Dimension { amplitude: 1, time: s.time_power() };
        match self {
            Formula::Value(s, _) | Formula::Diff(s, _, _) => sig(s),
            Formula::Interval(..) => Dimension { amplitude: 0, time: 1 },
            Formula::Slope(s, ..) | Formula::GridSlope(s, ..) => {
                let d = sig(s);
                Dimension { time: d.time - 1, ..d }
            }
            Formula::Moment(s, Stat::Mean | Stat::Std) => sig(s),
            Formula::Moment(_, _) => Dimension::NONE,
            Formula::Area(..) => Dimension { amplitude: 1, time: 1 },
            Formula::NormalizedArea | Formula::NormalizedPower | Formula::NotchPresent => {
                Dimension::NONE
            }
            Formula::HeartRate => Dimension { amplitude: 0, time: -1 },
            Formula::Quotient(a, b) => {
                let (a, b) = (a.dimension(), b.dimension());
                Dimension {
                    amplitude: a.amplitude - b.amplitude,
                    time: a.time - b.time,
                }
            }
        }
    }

    /// The signal the outermost operation reads.
    fn signal(&self) -> Signal {
        match self {
            Formula::Value(s, _)
            | Formula::Diff(s, ..)
            | Formula::Slope(s, ..)
            | Formula::GridSlope(s, ..)
            | Formula::Moment(s, _) => *s,
            Formula::Quotient(a, _) => a.signal(),
            _ => Signal::Cycle,
        }
    }

    fn needs_notch(&self) -> bool {
        let notchy = |p: &Point| matches!(p, Point::Notch | Point::DiastolicPeak);
        match self {
            Formula::Value(_, p) => notchy(p),
            Formula::Interval(a, b)
            | Formula::Diff(_, a, b)
            | Formula::Slope(_, a, b)
            | Formula::GridSlope(_, a, b)
            | Formula::Area(a, b) => notchy(a) || notchy(b),
            Formula::Quotient(a, b) => a.needs_notch() || b.needs_notch(),
            _ => false,
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Value(s, p) => write!(f, "value({}, {p})", s.name()),
            Formula::Interval(a, b) => write!(f, "interval({a}, {b})"),
            Formula::Diff(s, a, b) => write!(f, "diff({}, {a}, {b})", s.name()),
            Formula::Slope(s, a, b) => write!(f, "slope({}, {a}, {b})", s.name()),
            Formula::GridSlope(s, a, b) => write!(f, "grid_slope({}, {a}, {b})", s.name()),
            Formula::Moment(s, m) => {
                let m = match m {
                    Stat::Mean => "mean",
                    Stat::Std => "std",
                    Stat::Skewness => "skewness",
                    Stat::Kurtosis => "kurtosis",
                };
                write!(f, "{m}({})", s.name())
            }
            Formula::Area(a, b) => write!(f, "area({a}, {b})"),
            Formula::NormalizedArea => f.write_str("area(onset, end) / (value(cycle, peak) * interval(onset, end))"),
            Formula::NormalizedPower => f.write_str("mean(cycle²) / value(cycle, peak)²"),
            Formula::HeartRate => f.write_str("60 / interval(onset, end)"),
            Formula::NotchPresent => f.write_str("notch_present"),
            Formula::Quotient(a, b) => write!(f, "{a} / {b}"),
        }
    }
}

/// Powers of amplitude units and seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimension {
    pub amplitude: i32,
    pub time: i32,
}

impl Dimension {
    pub const NONE: Dimension = Dimension { amplitude: 0, time: 0 };

    /// Purely a duration: unchanged by amplitude scaling, tracks resampling.
    pub fn is_time(self) -> bool {
        self.amplitude == 0 && self.time == 1
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let part = |sym: &str, k: i32| match k {
            0 => String::new(),
            1 => sym.to_string(),
            k => format!("{sym}^{k}"),
        };
        match (self.amplitude, self.time) {
            (0, 0) => f.write_str("1"),
            (a, t) if t >= 0 => {
                let parts: Vec<String> =
                    [part("a", a), part("s", t)].into_iter().filter(|p| !p.is_empty()).collect();
                f.write_str(&parts.join("·"))
            }
            (0, t) => write!(f, "1/{}", part("s", -t)),
            (a, t) => write!(f, "{}/{}", part("a", a), part("s", -t)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDef {
    pub name: String,
    pub signal: Signal,
    pub formula: Formula,
    pub description: String,
}

/// The ordered list of PPG features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureCatalog {
    pub defs: Vec<FeatureDef>,
}

pub const WIDTH_LEVELS: [f64; 7] = [0.10, 0.25, 0.33, 0.50, 0.66, 0.75, 0.90];

impl Default for FeatureCatalog {
    fn default() -> Self {
        Self::standard()
    }
}

impl FeatureCatalog {
    /// The 104-entry catalog documented in `FEATURES.md`.
    pub fn standard() -> Self {
        use Formula as F;
        use Point as P;
        use Signal::{Cycle as C, D1, D2};

        let q = |a: Formula, b: Formula| F::Quotient(Box::new(a), Box::new(b));
        let span = || F::Interval(P::Onset, P::End);
        let peak = || F::Value(C, P::Peak);
        let mut defs: Vec<FeatureDef> = Vec::with_capacity(104);
        let mut add = |name: &str, formula: Formula, description: &str| {
            defs.push(FeatureDef {
                name: name.to_string(),
                signal: formula.signal(),
                formula,
                description: description.to_string(),
            });
        };

        add("PI", q(peak(), F::Moment(C, Stat::Mean)), "Systolic peak over the cycle mean");
        add("AS", F::GridSlope(C, P::Onset, P::Peak), "Slope of the systolic rise, AID over the rise time");
        add("AID", F::Diff(C, P::Onset, P::Peak), "Peak minus onset amplitude");
        add("DID", F::Diff(C, P::End, P::Peak), "Peak minus end amplitude");
        add("der_1_PI", F::Value(D1, P::D1Max), "d1 at its first maximum (first inflection point)");
        add("der_1_AS", F::GridSlope(D1, P::Onset, P::D1Max), "Slope of d1 from the cycle start to its first maximum");

        add("T", span(), "Cycle duration");
        add("HR_cyc", F::HeartRate, "Rate implied by the cycle duration, bpm");
        add("CT", F::Interval(P::Onset, P::Peak), "Crest time");
        add("CT_ratio", q(F::Interval(P::Onset, P::Peak), span()), "Crest time over duration");
        add("DT", F::Interval(P::Peak, P::End), "Time from peak to end");
        add("DT_CT", q(F::Interval(P::Peak, P::End), F::Interval(P::Onset, P::Peak)), "Descent time over crest time");
        add("SYS_amp", peak(), "Systolic peak amplitude");
        add("onset_v", F::Value(C, P::Onset), "Amplitude at the onset");
        add("end_v", F::Value(C, P::End), "Amplitude at the end");
        add("DS", F::GridSlope(C, P::Peak, P::End), "Mean slope of the descent");
        add("mean", F::Moment(C, Stat::Mean), "Cycle mean");
        add("std", F::Moment(C, Stat::Std), "Cycle standard deviation");
        add("skew", F::Moment(C, Stat::Skewness), "Cycle skewness");
        add("kurt", F::Moment(C, Stat::Kurtosis), "Cycle excess kurtosis");
        add("AID_DID", q(F::Diff(C, P::Onset, P::Peak), F::Diff(C, P::End, P::Peak)), "AID over DID");

        for level in WIDTH_LEVELS {
            let pct = (level * 100.0).round();
            let (up, down) = (P::Up(level), P::Down(level));
            add(&format!("SW{pct}"), F::Interval(up, P::Peak), &format!("Systolic width at {pct}% of the peak"));
            add(&format!("DW{pct}"), F::Interval(P::Peak, down), &format!("Diastolic width at {pct}% of the peak"));
            add(&format!("W{pct}"), F::Interval(up, down), &format!("Pulse width at {pct}% of the peak"));
            add(
                &format!("DW_SW{pct}"),
                q(F::Interval(P::Peak, down), F::Interval(up, P::Peak)),
                &format!("Diastolic over systolic width at {pct}%"),
            );
        }

        add("AT", F::Area(P::Onset, P::End), "Total area");
        add("SA", F::Area(P::Onset, P::Peak), "Systolic area, onset to peak");
        add("DA", F::Area(P::Peak, P::End), "Diastolic area, peak to end");
        add("IPA", q(F::Area(P::Peak, P::End), F::Area(P::Onset, P::Peak)), "Diastolic over systolic area");
        add("AT_norm", F::NormalizedArea, "Total area over the peak-duration rectangle");

        add("notch_present", F::NotchPresent, "1 if a dicrotic notch was found, else 0");
        add("notch_t", F::Interval(P::Onset, P::Notch), "Notch time");
        add("notch_v", F::Value(C, P::Notch), "Notch amplitude");
        add("notch_t_ratio", q(F::Interval(P::Onset, P::Notch), span()), "Notch time over duration");
        add("notch_v_ratio", q(F::Value(C, P::Notch), peak()), "Notch amplitude over peak");
        add("dia_t", F::Interval(P::Onset, P::DiastolicPeak), "Diastolic peak time");
        add("dia_v", F::Value(C, P::DiastolicPeak), "Diastolic peak amplitude");
        add("RI", q(F::Value(C, P::DiastolicPeak), peak()), "Reflection index, diastolic over systolic peak");
        add("delta_T", F::Interval(P::Peak, P::DiastolicPeak), "Peak-to-peak time");
        add("delta_T_ratio", q(F::Interval(P::Peak, P::DiastolicPeak), span()), "Peak-to-peak time over duration");
        add("notch_area_ratio", q(F::Area(P::Notch, P::End), F::Area(P::Onset, P::Notch)), "Area after the notch over area before it");

        add("d1_max_t", F::Interval(P::Onset, P::D1Max), "Time of the first d1 maximum");
        add("d1_max_t_ratio", q(F::Interval(P::Onset, P::D1Max), span()), "Same over duration");
        add("d1_min_v", F::Value(D1, P::D1Min), "Steepest descent rate");
        add("d1_min_t", F::Interval(P::Onset, P::D1Min), "Time of the steepest descent");
        add("d1_min_t_ratio", q(F::Interval(P::Onset, P::D1Min), span()), "Same over duration");
        add("d1_ratio", q(F::Value(D1, P::D1Min), F::Value(D1, P::D1Max)), "Steepest descent over first d1 maximum");
        add("d1_slope", F::Slope(D1, P::D1Max, P::D1Min), "Slope of d1 between its maximum and minimum");
        add("d1_std", F::Moment(D1, Stat::Std), "Standard deviation of d1");
        add("d1_skew", F::Moment(D1, Stat::Skewness), "Skewness of d1");
        add("d1_kurt", F::Moment(D1, Stat::Kurtosis), "Excess kurtosis of d1");
        add("d1_max_norm", q(F::Value(D1, P::D1Max), peak()), "First d1 maximum over peak amplitude");
        add("d1_min_norm", q(F::Value(D1, P::D1Min), peak()), "Steepest descent over peak amplitude");

        add("a_v", F::Value(D2, P::D2A), "d2 a-wave amplitude");
        add("a_t", F::Interval(P::Onset, P::D2A), "d2 a-wave time");
        add("b_v", F::Value(D2, P::D2B), "d2 b-wave amplitude");
        add("b_t", F::Interval(P::Onset, P::D2B), "d2 b-wave time");
        add("b_a", q(F::Value(D2, P::D2B), F::Value(D2, P::D2A)), "b over a");
        add("e_v", F::Value(D2, P::D2E), "d2 e-wave amplitude");
        add("e_t", F::Interval(P::Onset, P::D2E), "d2 e-wave time");
        add("e_a", q(F::Value(D2, P::D2E), F::Value(D2, P::D2A)), "e over a");
        add("a_t_ratio", q(F::Interval(P::Onset, P::D2A), span()), "a-wave time over duration");
        add("b_t_ratio", q(F::Interval(P::Onset, P::D2B), span()), "b-wave time over duration");
        add("e_t_ratio", q(F::Interval(P::Onset, P::D2E), span()), "e-wave time over duration");
        add("d2_max_v", F::Value(D2, P::D2Max), "Global d2 maximum");
        add("d2_max_t", F::Interval(P::Onset, P::D2Max), "Time of the global d2 maximum");
        add("d2_min_v", F::Value(D2, P::D2Min), "Global d2 minimum");
        add("d2_min_t", F::Interval(P::Onset, P::D2Min), "Time of the global d2 minimum");
        add("d2_std", F::Moment(D2, Stat::Std), "Standard deviation of d2");
        add("d2_skew", F::Moment(D2, Stat::Skewness), "Skewness of d2");
        add("d2_kurt", F::Moment(D2, Stat::Kurtosis), "Excess kurtosis of d2");
        add("b_a_slope", F::Slope(D2, P::D2A, P::D2B), "Slope of d2 from the a to the b wave");

        add("T_infl_peak", F::Interval(P::D1Max, P::Peak), "First d1 maximum to peak");
        add("T_peak_d1min", F::Interval(P::Peak, P::D1Min), "Peak to steepest descent");
        add("T_ab", F::Interval(P::D2A, P::D2B), "a-wave to b-wave");
        add("T_be", F::Interval(P::D2B, P::D2E), "b-wave to e-wave");
        add("rise_10_90", F::Interval(P::Up(0.1), P::Up(0.9)), "Upstroke time from 10% to 90% of the peak");
        add("fall_90_10", F::Interval(P::Down(0.9), P::Down(0.1)), "Downstroke time from 90% to 10% of the peak");
        add("power", F::NormalizedPower, "Mean square over squared peak");
        add("a_norm", q(F::Value(D2, P::D2A), peak()), "d2 a-wave over peak amplitude");

        FeatureCatalog { defs }
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.defs.iter().map(|d| d.name.as_str())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.defs.iter().position(|d| d.name == name)
    }

    /// Features that fall back to 0 when the notch is absent.
    pub fn notch_dependent(&self) -> Vec<usize> {
        (0..self.defs.len()).filter(|&i| self.defs[i].formula.needs_notch()).collect()
    }

    pub fn has_unique_names(&self) -> bool {
        let mut seen = HashSet::new();
        self.defs.iter().all(|d| seen.insert(d.name.as_str()))
    }
}

/// The catalog as the Markdown table stored in `FEATURES.md`.
pub fn catalog_markdown(catalog: &FeatureCatalog) -> String {
    let mut out = String::from(
        "# PPG feature catalog\n\
         \n\
         Generated from `FeatureCatalog::standard()`; a test keeps this file in sync.\n\
         \n\
         Conventions:\n\
         \n\
         - Cycles are baseline-corrected and not amplitude-normalized. Times are seconds from the cycle start.\n\
         - `d1` and `d2` are the first and second derivatives (central differences, one-sided at the ends).\n\
         - Landmark times are refined to sub-sample precision by a parabola through the extremum; `grid_slope` uses sample-grid times.\n\
         - `peak` is the global maximum (earliest on ties). `d1_max` is the first local maximum of d1 before the peak; `d1_min` the minimum of d1 from the peak on.\n\
         - `d2_a` is the d2 maximum up to `d1_max`, `d2_b` the d2 minimum from `d2_a` to `d1_min`, `d2_e` the d2 maximum after `d1_min` within the first three quarters of the cycle.\n\
         - `notch` is the first local minimum after the peak that is followed by a local maximum, `diastolic_peak` that maximum. Without a notch every feature that uses either is 0.\n\
         - `up(l)` and `down(l)` are the linearly interpolated crossings of `l × peak` nearest the peak on each side; the cycle start or end when the signal never drops below.\n\
         - Areas are trapezoidal. A quotient with a zero denominator is 0.\n\
         - Units: `a` is the amplitude unit of the input, `s` seconds.\n\
         \n\
         The feature vector appends six metadata slots: sex (male = 1), age, height, weight, heart rate, BMI.\n\
         \n\
         | # | name | signal | unit | formula | description |\n\
         |---|------|--------|------|---------|-------------|\n",
    );
    for (i, d) in catalog.defs.iter().enumerate() {
        out.push_str(&format!(
            "| {} | `{}` | {} | {} | `{}` | {} |\n",
            i + 1,
            d.name,
            d.signal.name(),
            d.formula.dimension(),
            d.formula,
            d.description
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_catalog_has_104_unique_entries() {
        let c = FeatureCatalog::standard();
        assert_eq!(c.len(), 104);
        assert!(c.has_unique_names());
        for name in ["der_1_PI", "AS", "der_1_AS", "DID", "AID", "PI", "notch_present"] {
            assert!(c.index_of(name).is_some(), "{name}");
        }
    }

    #[test]
    fn dimensions() {
        let c = FeatureCatalog::standard();
        let dim = |n: &str| c.defs[c.index_of(n).unwrap()].formula.dimension();
        assert_eq!(dim("PI"), Dimension::NONE);
        assert_eq!(dim("AS").to_string(), "a/s");
        assert_eq!(dim("der_1_AS").to_string(), "a/s^2");
        assert_eq!(dim("AT").to_string(), "a·s");
        assert_eq!(dim("HR_cyc").to_string(), "1/s");
        assert!(dim("W50").is_time());
        assert_eq!(dim("b_a"), Dimension::NONE);
    }

    #[test]
    fn notch_dependence() {
        let c = FeatureCatalog::standard();
        let names: Vec<&str> = c.notch_dependent().into_iter().map(|i| c.defs[i].name.as_str()).collect();
        assert_eq!(names.len(), 10);
        assert!(names.contains(&"RI") && !names.contains(&"notch_present"));
    }
}
