//! Log-domain helpers for survival products.
//!
//! Every aggregate in this crate is a product of per-event survival
//! probabilities. Products of `(1 - p)` with `p ~ 1e-15` round to exactly one,
//! so survival is carried as a sum of log-survival terms and only converted
//! back to a failure probability at the very end via `expm1`.

/// Failure probability `1 - exp(log_survival)`, accurate for tiny probabilities.
#[inline]
pub fn prob_from_log_survival(log_survival: f64) -> f64 {
    if log_survival == f64::NEG_INFINITY {
        return 1.0;
    }
    // `0 - x` rather than `-x` so an exact zero stays positive
    (0.0 - log_survival.exp_m1()).clamp(0.0, 1.0)
}

/// `ln(1 - p)` without cancellation for small `p`.
#[inline]
pub fn log_survival_from_prob(p: f64) -> f64 {
    (-p).ln_1p()
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
    neg_inf: bool,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            self.neg_inf = true;
            return;
        }
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        if self.neg_inf {
            f64::NEG_INFINITY
        } else {
            self.sum + self.comp
        }
    }
}

/// Accumulates `Σ rate_k · exposure_k` where exposures are exact integers
/// (nanoseconds, read counts, transition counts).
///
/// Consecutive pushes that share a bit-identical rate are merged by adding
/// their integer exposures before any floating-point multiplication, so a
/// field of identical rates reduces to a single `rate · Σ exposure` product.
/// That makes the per-cell path collapse bit-exactly onto the scalar path
/// whenever every cell carries the nominal parameters.
#[derive(Clone, Debug)]
pub struct ExposureSum {
    unit: f64,
    run_rate: f64,
    run_exposure: u128,
    sum: NeumaierSum,
}

impl ExposureSum {
    /// `unit` converts one exposure tick into the unit the rates are expressed
    /// in (e.g. `1e-9` for nanosecond exposures against per-second rates).
    pub fn new(unit: f64) -> Self {
        Self {
            unit,
            run_rate: 0.0,
            run_exposure: 0,
            sum: NeumaierSum::new(),
        }
    }

    pub fn push(&mut self, rate: f64, exposure: u128) {
        if exposure == 0 {
            return;
        }
        if self.run_exposure > 0 && rate.to_bits() == self.run_rate.to_bits() {
            self.run_exposure += exposure;
            return;
        }
        self.flush();
        self.run_rate = rate;
        self.run_exposure = exposure;
    }

    fn flush(&mut self) {
        if self.run_exposure > 0 {
            let scaled = self.run_exposure as f64 * self.unit;
            self.sum.add(self.run_rate * scaled);
            self.run_exposure = 0;
        }
    }

    pub fn finish(mut self) -> f64 {
        self.flush();
        self.sum.value()
    }
}
