//! Second-order forward-mode differentiation in two variables.
//!
//! A [`Jet2`] carries a value, its gradient and its Hessian with respect to
//! the plane coordinates `(x, y)`. Analytic fields written over `Jet2` give
//! exact derivatives up to rounding, which is how forcing terms, tractions
//! and PDE residuals are derived from closed-form solutions.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub v: f64,
    pub g: [f64; 2],
    /// Hessian entries `[xx, xy, yy]`.
    pub h: [f64; 3],
}

impl Jet2 {
    pub const fn constant(v: f64) -> Self {
        Jet2 { v, g: [0.0; 2], h: [0.0; 3] }
    }

    /// Seed the coordinate pair `(x, y)`.
    pub fn variables(x: f64, y: f64) -> (Self, Self) {
        (
            Jet2 { v: x, g: [1.0, 0.0], h: [0.0; 3] },
            Jet2 { v: y, g: [0.0, 1.0], h: [0.0; 3] },
        )
    }

    pub fn is_constant(&self) -> bool {
        self.g == [0.0; 2] && self.h == [0.0; 3]
    }

    pub fn laplacian(&self) -> f64 {
        self.h[0] + self.h[2]
    }

    /// Apply a scalar function given `f(a), f'(a), f''(a)`.
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let [gx, gy] = self.g;
        Jet2 {
            v: f0,
            g: [f1 * gx, f1 * gy],
            h: [
                f1 * self.h[0] + f2 * gx * gx,
                f1 * self.h[1] + f2 * gx * gy,
                f1 * self.h[2] + f2 * gy * gy,
            ],
        }
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(self.v.ln(), r, -r * r)
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn tanh(self) -> Self {
        let t = self.v.tanh();
        let d = 1.0 - t * t;
        self.chain(t, d, -2.0 * t * d)
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn powi(self, n: i32) -> Self {
        let nf = n as f64;
        match n {
            0 => Jet2::constant(1.0),
            1 => self,
            _ => self.chain(
                self.v.powi(n),
                nf * self.v.powi(n - 1),
                nf * (nf - 1.0) * self.v.powi(n - 2),
            ),
        }
    }

    pub fn powf(self, p: f64) -> Self {
        if p.fract() == 0.0 && p.abs() < i32::MAX as f64 {
            return self.powi(p as i32);
        }
        self.chain(
            self.v.powf(p),
            p * self.v.powf(p - 1.0),
            p * (p - 1.0) * self.v.powf(p - 2.0),
        )
    }

    /// General power; constant exponents avoid the logarithm so that negative
    /// bases with integer exponents stay finite.
    pub fn pow(self, e: Jet2) -> Self {
        if e.is_constant() {
            self.powf(e.v)
        } else {
            (e * self.ln()).exp()
        }
    }
}

impl From<f64> for Jet2 {
    fn from(v: f64) -> Self {
        Jet2::constant(v)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v + o.v,
            g: [self.g[0] + o.g[0], self.g[1] + o.g[1]],
            h: [self.h[0] + o.h[0], self.h[1] + o.h[1], self.h[2] + o.h[2]],
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2 {
            v: -self.v,
            g: [-self.g[0], -self.g[1]],
            h: [-self.h[0], -self.h[1], -self.h[2]],
        }
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        let (a, b) = (self, o);
        Jet2 {
            v: a.v * b.v,
            g: [a.v * b.g[0] + b.v * a.g[0], a.v * b.g[1] + b.v * a.g[1]],
            h: [
                a.v * b.h[0] + b.v * a.h[0] + 2.0 * a.g[0] * b.g[0],
                a.v * b.h[1] + b.v * a.h[1] + a.g[0] * b.g[1] + a.g[1] * b.g[0],
                a.v * b.h[2] + b.v * a.h[2] + 2.0 * a.g[1] * b.g[1],
            ],
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip()
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, s: f64) -> Jet2 {
        Jet2 {
            v: self.v * s,
            g: [self.g[0] * s, self.g[1] * s],
            h: [self.h[0] * s, self.h[1] * s, self.h[2] * s],
        }
    }
}

impl Mul<Jet2> for f64 {
    type Output = Jet2;
    fn mul(self, j: Jet2) -> Jet2 {
        j * self
    }
}

impl Div<f64> for Jet2 {
    type Output = Jet2;
    fn div(self, s: f64) -> Jet2 {
        self * (1.0 / s)
    }
}

impl Div<Jet2> for f64 {
    type Output = Jet2;
    fn div(self, j: Jet2) -> Jet2 {
        j.recip() * self
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(mut self, s: f64) -> Jet2 {
        self.v += s;
        self
    }
}

impl Add<Jet2> for f64 {
    type Output = Jet2;
    fn add(self, j: Jet2) -> Jet2 {
        j + self
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(mut self, s: f64) -> Jet2 {
        self.v -= s;
        self
    }
}

impl Sub<Jet2> for f64 {
    type Output = Jet2;
    fn sub(self, j: Jet2) -> Jet2 {
        -j + self
    }
}

impl AddAssign for Jet2 {
    fn add_assign(&mut self, o: Jet2) {
        *self = *self + o;
    }
}

impl SubAssign for Jet2 {
    fn sub_assign(&mut self, o: Jet2) {
        *self = *self - o;
    }
}

impl MulAssign for Jet2 {
    fn mul_assign(&mut self, o: Jet2) {
        *self = *self * o;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: impl Fn(Jet2, Jet2) -> Jet2, x: f64, y: f64) {
        let (jx, jy) = Jet2::variables(x, y);
        let j = f(jx, jy);
        let e = 1e-4;
        let val = |a: f64, b: f64| {
            let (u, v) = Jet2::variables(a, b);
            f(u, v)
        };
        let gx = (val(x + e, y).v - val(x - e, y).v) / (2.0 * e);
        let gy = (val(x, y + e).v - val(x, y - e).v) / (2.0 * e);
        assert!((gx - j.g[0]).abs() < 1e-6 * (1.0 + gx.abs()));
        assert!((gy - j.g[1]).abs() < 1e-6 * (1.0 + gy.abs()));
        let hxx = (val(x + e, y).g[0] - val(x - e, y).g[0]) / (2.0 * e);
        let hxy = (val(x, y + e).g[0] - val(x, y - e).g[0]) / (2.0 * e);
        let hyy = (val(x, y + e).g[1] - val(x, y - e).g[1]) / (2.0 * e);
        assert!((hxx - j.h[0]).abs() < 1e-6 * (1.0 + hxx.abs()));
        assert!((hxy - j.h[1]).abs() < 1e-6 * (1.0 + hxy.abs()));
        assert!((hyy - j.h[2]).abs() < 1e-6 * (1.0 + hyy.abs()));
    }

    #[test]
    fn derivatives_match_differences() {
        fd_check(|x, y| (x * y).sin() + x.powi(3) / (1.0 + y * y), 0.3, -0.7);
        fd_check(|x, y| (x - y).exp() * y.cos() - x.sqrt(), 1.2, 0.4);
        fd_check(|x, y| x.pow(y) + (x * 2.0).tanh() - y.ln(), 1.3, 0.8);
        fd_check(|x, y| 3.0 / (x + y) - (2.0 - x) * y, 0.5, 0.25);
    }

    #[test]
    fn negative_base_integer_power() {
        let (x, _) = Jet2::variables(-2.0, 0.0);
        let p = x.pow(Jet2::constant(3.0));
        assert_eq!(p.v, -8.0);
        assert_eq!(p.g[0], 12.0);
        assert_eq!(p.h[0], -12.0);
    }
}
