//! Adaptive quadrature for the antenna pattern normalization integral.
//!
//! Adaptive Simpson with Richardson extrapolation. The relative tolerance is
//! turned into an absolute one using a coarse composite estimate of the whole
//! integral, so subdivision effort concentrates where the integrand actually
//! contributes. A shared evaluation budget turns runaway recursion into a
//! typed error instead of a hang.

use std::cell::Cell;

use crate::{dbl, fl, Error, Real, Result};

/// Hard cap on integrand evaluations for one integral (2-D integrals count
/// inner evaluations against the same budget).
pub const MAX_EVALS: usize = 4_000_000;

struct Budget {
    used: Cell<usize>,
    cap: usize,
}

impl Budget {
    fn new(cap: usize) -> Self {
        Self {
            used: Cell::new(0),
            cap,
        }
    }

    fn spend(&self, n: usize) -> bool {
        self.used.set(self.used.get() + n);
        self.used.get() <= self.cap
    }

    fn overrun<T: Real>(&self, estimate: T) -> Error {
        Error::QuadratureNonConvergence {
            evals: self.used.get(),
            estimate: dbl(estimate),
        }
    }
}

fn simpson<T: Real>(fa: T, fm: T, fb: T, h: T) -> T {
    h / fl::<T>(6.0) * (fa + fl::<T>(4.0) * fm + fb)
}

/// Composite Simpson on uniform panels, used to scale the tolerance.
fn coarse_estimate<T: Real>(
    f: &mut dyn FnMut(T) -> Result<T>,
    a: T,
    b: T,
    panels: usize,
    budget: &Budget,
) -> Result<T> {
    if !budget.spend(2 * panels + 1) {
        return Err(budget.overrun(T::zero()));
    }
    let h = (b - a) / fl(panels as f64);
    let mut acc = T::zero();
    for i in 0..panels {
        let x0 = a + h * fl(i as f64);
        let xm = x0 + h / fl(2.0);
        acc += simpson(f(x0)?, f(xm)?, f(x0 + h)?, h);
    }
    Ok(acc)
}

struct Frame<T> {
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
}

fn adaptive<T: Real>(
    f: &mut dyn FnMut(T) -> Result<T>,
    a: T,
    b: T,
    abs_tol: T,
    budget: &Budget,
) -> Result<T> {
    if !budget.spend(3) {
        return Err(budget.overrun(T::zero()));
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let m = (a + b) / fl(2.0);
    let fm = f(m)?;
    let whole = simpson(fa, fm, fb, b - a);
    let mut total = T::zero();
    let mut stack = vec![Frame {
        a,
        b,
        fa,
        fm,
        fb,
        whole,
        tol: abs_tol,
        depth: 0,
    }];
    while let Some(fr) = stack.pop() {
        if !budget.spend(2) {
            return Err(budget.overrun(total));
        }
        let m = (fr.a + fr.b) / fl(2.0);
        let lm = (fr.a + m) / fl(2.0);
        let rm = (m + fr.b) / fl(2.0);
        let flm = f(lm)?;
        let frm = f(rm)?;
        let h = m - fr.a;
        let left = simpson(fr.fa, flm, fr.fm, h);
        let right = simpson(fr.fm, frm, fr.fb, h);
        let delta = left + right - fr.whole;
        if fr.depth >= 48 || delta.abs() <= fl::<T>(15.0) * fr.tol {
            total += left + right + delta / fl(15.0);
        } else {
            let half_tol = fr.tol / fl(2.0);
            stack.push(Frame {
                a: fr.a,
                b: m,
                fa: fr.fa,
                fm: flm,
                fb: fr.fm,
                whole: left,
                tol: half_tol,
                depth: fr.depth + 1,
            });
            stack.push(Frame {
                a: m,
                b: fr.b,
                fa: fr.fm,
                fm: frm,
                fb: fr.fb,
                whole: right,
                tol: half_tol,
                depth: fr.depth + 1,
            });
        }
    }
    Ok(total)
}

fn integrate_with_budget<T: Real>(
    f: &mut dyn FnMut(T) -> Result<T>,
    a: T,
    b: T,
    rel_tol: T,
    budget: &Budget,
) -> Result<T> {
    let rough = coarse_estimate(f, a, b, 32, budget)?;
    let scale = rough.abs().max(T::min_positive_value().sqrt());
    adaptive(f, a, b, rel_tol * scale, budget)
}

/// Integrates `f` over `[a, b]` to the given relative tolerance.
pub fn integrate<T: Real>(mut f: impl FnMut(T) -> T, a: T, b: T, rel_tol: T) -> Result<T> {
    let budget = Budget::new(MAX_EVALS);
    let mut g = |x: T| -> Result<T> { Ok(f(x)) };
    integrate_with_budget(&mut g, a, b, rel_tol, &budget)
}

/// Integrates `f(x, y)` over `[ax, bx] x [ay, by]` to the given relative
/// tolerance, via nested adaptive passes sharing one evaluation budget.
pub fn integrate_2d<T: Real>(
    mut f: impl FnMut(T, T) -> T,
    (ax, bx): (T, T),
    (ay, by): (T, T),
    rel_tol: T,
) -> Result<T> {
    let budget = Budget::new(MAX_EVALS);
    let inner_tol = rel_tol / fl(4.0);
    let mut outer = |x: T| -> Result<T> {
        let mut inner = |y: T| -> Result<T> { Ok(f(x, y)) };
        integrate_with_budget(&mut inner, ay, by, inner_tol, &budget)
    };
    let rough = coarse_estimate(&mut outer, ax, bx, 16, &budget)?;
    let scale = rough.abs().max(T::min_positive_value().sqrt());
    adaptive(&mut outer, ax, bx, rel_tol * scale, &budget)
}
