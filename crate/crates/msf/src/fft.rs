//! Shared FFT plans.
//!
//! All transforms in the crate run through this planner cache so repeated
//! transforms of the same length reuse twiddle tables. Conventions are fixed
//! crate-wide:
//!
//! * synthesis (coefficients → values): `values[j] = Σₙ coeffs[n]·ω^{jn}`,
//!   `ω = e^{2πi/N}` — the *unnormalized inverse* FFT;
//! * analysis (values → coefficients): forward FFT divided by `N`.
//!
//! With these choices analysis∘synthesis is the identity, and a coefficient
//! at array index `n` is the Fourier coefficient of power `n` for
//! `n ≤ N/2`, and of power `n − N` (negative) above.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

enum Dir {
    Forward,
    Inverse,
}

fn plan(len: usize, dir: Dir) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<Mutex<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().unwrap();
    let key = (len, matches!(dir, Dir::Forward));
    if let Some(p) = guard.1.get(&key) {
        return Arc::clone(p);
    }
    let p = match dir {
        Dir::Forward => guard.0.plan_fft_forward(len),
        Dir::Inverse => guard.0.plan_fft_inverse(len),
    };
    guard.1.insert(key, Arc::clone(&p));
    p
}

/// Coefficients → values, in place (unnormalized inverse FFT).
pub fn synthesis_inplace(buf: &mut [Complex64]) {
    plan(buf.len(), Dir::Inverse).process(buf);
}

/// Values → coefficients, in place (forward FFT scaled by 1/N).
pub fn analysis_inplace(buf: &mut [Complex64]) {
    let n = buf.len();
    plan(n, Dir::Forward).process(buf);
    let s = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= s;
    }
}
