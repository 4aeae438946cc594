//! Dormand–Prince 5(4) integrator for autonomous systems with Hairer's fourth-order
//! continuous extension.
//!
//! The driver hands out one accepted step at a time so callers can test their own
//! events against the dense output before committing the step.

// Autonomous systems only, so the nodes c2..c7 never appear.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5Options {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Steps shorter than this abort with [`StepFailure::StepSizeUnderflow`].
    pub h_min: f64,
    pub h_max: f64,
    pub h_init: Option<f64>,
    pub safety: f64,
    pub fac_min: f64,
    pub fac_max: f64,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            h_min: 1e-12,
            h_max: f64::INFINITY,
            h_init: None,
            safety: 0.9,
            fac_min: 0.2,
            fac_max: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepFailure {
    StepSizeUnderflow,
    NonFinite,
    /// More consecutive rejections than the driver tolerates.
    Rejections,
}

/// One accepted step together with its continuous extension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseStep<const N: usize> {
    pub s0: f64,
    pub h: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn s1(&self) -> f64 {
        self.s0 + self.h
    }

    pub fn start(&self) -> [f64; N] {
        self.rcont[0]
    }

    pub fn end(&self) -> [f64; N] {
        std::array::from_fn(|i| self.rcont[0][i] + self.rcont[1][i])
    }

    /// State at the fraction `theta ∈ [0, 1]` of the step.
    pub fn eval_theta(&self, theta: f64) -> [f64; N] {
        let th1 = 1.0 - theta;
        let r = &self.rcont;
        std::array::from_fn(|i| {
            r[0][i] + theta * (r[1][i] + th1 * (r[2][i] + theta * (r[3][i] + th1 * r[4][i])))
        })
    }

    /// Derivative of the continuous extension with respect to `s`.
    pub fn deriv_theta(&self, theta: f64) -> [f64; N] {
        let th1 = 1.0 - theta;
        let r = &self.rcont;
        std::array::from_fn(|i| {
            let a = r[3][i] + th1 * r[4][i];
            let da = -r[4][i];
            let b = r[2][i] + theta * a;
            let db = a + theta * da;
            let c = r[1][i] + th1 * b;
            let dc = -b + th1 * db;
            (c + theta * dc) / self.h
        })
    }

    pub fn eval(&self, s: f64) -> [f64; N] {
        self.eval_theta((s - self.s0) / self.h)
    }
}

pub struct Dopri5<F, const N: usize> {
    rhs: F,
    opts: Dopri5Options,
    s: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    last_rejected: bool,
    pub evaluations: usize,
    pub accepted: usize,
    pub rejected: usize,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        y[i] + h * acc
    })
}

fn all_finite<const N: usize>(v: &[f64; N]) -> bool {
    v.iter().all(|x| x.is_finite())
}

impl<F, const N: usize> Dopri5<F, N>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    pub fn new(rhs: F, s0: f64, y0: [f64; N], opts: Dopri5Options) -> Self {
        let k1 = rhs(&y0);
        let mut solver = Self {
            rhs,
            opts,
            s: s0,
            y: y0,
            k1,
            h: 0.0,
            last_rejected: false,
            evaluations: 1,
            accepted: 0,
            rejected: 0,
        };
        solver.h = solver.opts.h_init.unwrap_or_else(|| solver.initial_step());
        solver
    }

    pub fn state(&self) -> (f64, [f64; N]) {
        (self.s, self.y)
    }

    fn scale(&self, a: &[f64; N], b: &[f64; N]) -> [f64; N] {
        std::array::from_fn(|i| self.opts.abs_tol + self.opts.rel_tol * a[i].abs().max(b[i].abs()))
    }

    fn rms(v: &[f64; N], sc: &[f64; N]) -> f64 {
        (v.iter().zip(sc).map(|(x, s)| (x / s).powi(2)).sum::<f64>() / N as f64).sqrt()
    }

    /// Hairer–Wanner starting step heuristic.
    fn initial_step(&mut self) -> f64 {
        let sc = self.scale(&self.y, &self.y);
        let d0 = Self::rms(&self.y, &sc);
        let d1 = Self::rms(&self.k1, &sc);
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(self.opts.h_max);
        let y1 = axpy(&self.y, h0, &[(1.0, &self.k1)]);
        let f1 = (self.rhs)(&y1);
        self.evaluations += 1;
        let diff: [f64; N] = std::array::from_fn(|i| f1[i] - self.k1[i]);
        let d2 = Self::rms(&diff, &sc) / h0;
        let dmax = d1.max(d2);
        let h1 = if dmax <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / dmax).powf(0.2)
        };
        let h = (100.0 * h0).min(h1).min(self.opts.h_max);
        if h.is_finite() && h > 0.0 {
            h
        } else {
            1e-6
        }
    }

    /// Advance by one accepted step.
    pub fn step(&mut self) -> Result<DenseStep<N>, StepFailure> {
        let mut rejections = 0usize;
        loop {
            let h = self.h.min(self.opts.h_max);
            if h < self.opts.h_min {
                return Err(StepFailure::StepSizeUnderflow);
            }
            let y = self.y;
            let k1 = self.k1;
            let f = &self.rhs;
            let k2 = f(&axpy(&y, h, &[(A21, &k1)]));
            let k3 = f(&axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(&axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(&axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(&axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ));
            let y1 = axpy(
                &y,
                h,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = f(&y1);
            self.evaluations += 6;

            let err_vec: [f64; N] = std::array::from_fn(|i| {
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            });
            let finite = all_finite(&y1) && all_finite(&k7) && all_finite(&err_vec);
            let err = if finite {
                Self::rms(&err_vec, &self.scale(&y, &y1))
            } else {
                f64::INFINITY
            };

            if err <= 1.0 {
                let fac = if err == 0.0 {
                    self.opts.fac_max
                } else {
                    (self.opts.safety * err.powf(-0.2)).clamp(self.opts.fac_min, self.opts.fac_max)
                };
                let fac = if self.last_rejected { fac.min(1.0) } else { fac };
                let mut rcont = [[0.0; N]; 5];
                for i in 0..N {
                    let ydiff = y1[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    rcont[0][i] = y[i];
                    rcont[1][i] = ydiff;
                    rcont[2][i] = bspl;
                    rcont[3][i] = ydiff - h * k7[i] - bspl;
                    rcont[4][i] = h
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                            + D7 * k7[i]);
                }
                let dense = DenseStep { s0: self.s, h, rcont };
                self.s += h;
                self.y = y1;
                self.k1 = k7;
                self.h = h * fac;
                self.last_rejected = false;
                self.accepted += 1;
                return Ok(dense);
            }

            if !finite && rejections > 60 {
                return Err(StepFailure::NonFinite);
            }
            rejections += 1;
            self.rejected += 1;
            if rejections > 200 {
                return Err(StepFailure::Rejections);
            }
            let fac = if finite {
                (self.opts.safety * err.powf(-0.2)).clamp(self.opts.fac_min, 1.0)
            } else {
                self.opts.fac_min
            };
            self.h = h * fac;
            self.last_rejected = true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_to_tolerance() {
        let mut solver = Dopri5::new(|y: &[f64; 1]| [-y[0]], 0.0, [1.0], Dopri5Options::default());
        let mut last = None;
        while solver.state().0 < 5.0 {
            last = Some(solver.step().unwrap());
        }
        let (s, y) = solver.state();
        assert!((y[0] - (-s).exp()).abs() < 1e-9);
        let step = last.unwrap();
        let mid = 0.5 * (step.s0 + step.s1());
        assert!((step.eval(mid)[0] - (-mid).exp()).abs() < 1e-9);
        assert!((step.deriv_theta(0.5)[0] + (-mid).exp()).abs() < 1e-7);
    }

    #[test]
    fn dense_output_matches_endpoints_and_derivatives() {
        let mut solver = Dopri5::new(
            |y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [0.0, 1.0],
            Dopri5Options { rel_tol: 1e-12, abs_tol: 1e-14, ..Default::default() },
        );
        for _ in 0..50 {
            let st = solver.step().unwrap();
            assert_eq!(st.eval_theta(0.0), st.start());
            let e = st.eval_theta(1.0);
            let end = st.end();
            assert!((e[0] - end[0]).abs() < 1e-15 && (e[1] - end[1]).abs() < 1e-15);
            for k in 0..=8 {
                let th = k as f64 / 8.0;
                let s = st.s0 + th * st.h;
                let v = st.eval_theta(th);
                let d = st.deriv_theta(th);
                assert!((v[0] - s.sin()).abs() < 1e-10);
                assert!((d[0] - s.cos()).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn underflow_reported() {
        let mut solver = Dopri5::new(
            |y: &[f64; 1]| [1.0 / (1.0 - y[0])],
            0.0,
            [0.0],
            Dopri5Options { h_min: 1e-6, ..Default::default() },
        );
        let mut failure = None;
        for _ in 0..100_000 {
            if let Err(e) = solver.step() {
                failure = Some(e);
                break;
            }
        }
        assert!(failure.is_some());
    }
}
