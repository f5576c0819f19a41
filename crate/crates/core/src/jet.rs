//! Truncated multivariate Taylor polynomials ("jets").
//!
//! A [`Jet`] stores the Taylor coefficients `c_α = ∂^α f / α!` of a scalar
//! function at a point, for every multi-index `α` of total degree at most
//! `order`, in up to four variables. Coefficients are kept in a dense array
//! ordered by degree and, within one degree, lexicographically with the first
//! variable's exponent descending. Because the ordering is graded, a jet of a
//! lower order is a prefix of the higher-order layout.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use crate::error::{GeomError, Result};

pub const MAX_VARS: usize = 4;
pub const MAX_ORDER: usize = 4;
/// Number of multi-indices of degree ≤ 4 in 4 variables.
pub const MAX_COEFFS: usize = 70;

struct Layout {
    /// Multi-indices in storage order.
    indices: Vec<[u8; MAX_VARS]>,
    /// Number of coefficients for each truncation order.
    len_for_order: [usize; MAX_ORDER + 1],
    /// Base-5 code of a multi-index -> storage position.
    lookup: [u8; 625],
    /// For each order, the (lhs, rhs, out) triples of the truncated product.
    products: Vec<Vec<(u8, u8, u8)>>,
    /// `derivs[v][k]` = (source position of α + e_v, factor α_v + 1) for target position k.
    derivs: Vec<Vec<(u8, f64)>>,
}

fn code(alpha: &[u8; MAX_VARS]) -> usize {
    alpha.iter().fold(0usize, |acc, &a| acc * 5 + a as usize)
}

fn degree(alpha: &[u8; MAX_VARS]) -> usize {
    alpha.iter().map(|&a| a as usize).sum()
}

fn push_degree(nvars: usize, deg: usize, var: usize, cur: &mut [u8; MAX_VARS], out: &mut Vec<[u8; MAX_VARS]>) {
    if var + 1 == nvars {
        cur[var] = deg as u8;
        out.push(*cur);
        cur[var] = 0;
        return;
    }
    for e in (0..=deg).rev() {
        cur[var] = e as u8;
        push_degree(nvars, deg - e, var + 1, cur, out);
    }
    cur[var] = 0;
}

impl Layout {
    fn build(nvars: usize) -> Self {
        let mut indices = Vec::new();
        let mut len_for_order = [0; MAX_ORDER + 1];
        for deg in 0..=MAX_ORDER {
            let mut cur = [0u8; MAX_VARS];
            push_degree(nvars, deg, 0, &mut cur, &mut indices);
            len_for_order[deg] = indices.len();
        }
        let mut lookup = [u8::MAX; 625];
        for (k, a) in indices.iter().enumerate() {
            lookup[code(a)] = k as u8;
        }
        let mut products = Vec::with_capacity(MAX_ORDER + 1);
        for order in 0..=MAX_ORDER {
            let n = len_for_order[order];
            let mut triples = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let (a, b) = (&indices[i], &indices[j]);
                    if degree(a) + degree(b) > order {
                        continue;
                    }
                    let mut s = [0u8; MAX_VARS];
                    for v in 0..MAX_VARS {
                        s[v] = a[v] + b[v];
                    }
                    triples.push((i as u8, j as u8, lookup[code(&s)]));
                }
            }
            products.push(triples);
        }
        let mut derivs = Vec::with_capacity(nvars);
        for v in 0..nvars {
            let mut row = Vec::new();
            for a in indices.iter().take(len_for_order[MAX_ORDER - 1]) {
                let mut up = *a;
                up[v] += 1;
                row.push((lookup[code(&up)], (a[v] + 1) as f64));
            }
            derivs.push(row);
        }
        Layout {
            indices,
            len_for_order,
            lookup,
            products,
            derivs,
        }
    }
}

fn layout(nvars: usize) -> &'static Layout {
    static LAYOUTS: OnceLock<Vec<Layout>> = OnceLock::new();
    let all = LAYOUTS.get_or_init(|| (1..=MAX_VARS).map(Layout::build).collect());
    &all[nvars - 1]
}

/// Number of Taylor coefficients of a jet in `nvars` variables truncated at `order`.
pub fn coeff_count(nvars: usize, order: usize) -> usize {
    layout(nvars).len_for_order[order]
}

/// Elementary functions that can be composed with a jet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Elementary {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Atan,
}

impl Elementary {
    pub fn name(self) -> &'static str {
        match self {
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
            Elementary::Exp => "exp",
            Elementary::Log => "log",
            Elementary::Sqrt => "sqrt",
            Elementary::Atan => "atan",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Elementary::Sin,
            "cos" => Elementary::Cos,
            "exp" => Elementary::Exp,
            "log" => Elementary::Log,
            "sqrt" => Elementary::Sqrt,
            "atan" => Elementary::Atan,
            _ => return None,
        })
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            Elementary::Sin => x.sin(),
            Elementary::Cos => x.cos(),
            Elementary::Exp => x.exp(),
            Elementary::Log => x.ln(),
            Elementary::Sqrt => x.sqrt(),
            Elementary::Atan => x.atan(),
        }
    }
}

/// Truncated multivariate Taylor expansion of a scalar field.
#[derive(Clone, Copy)]
pub struct Jet {
    nvars: u8,
    order: u8,
    c: [f64; MAX_COEFFS],
}

impl std::fmt::Debug for Jet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.nvars)
            .field("order", &self.order)
            .field("coeffs", &self.coeffs())
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.nvars == other.nvars && self.order == other.order && self.coeffs() == other.coeffs()
    }
}

impl Jet {
    pub fn constant(value: f64, num_vars: usize, order: usize) -> Self {
        assert!((1..=MAX_VARS).contains(&num_vars), "jets support 1..=4 variables");
        assert!(order <= MAX_ORDER, "jets support order <= 4");
        let mut c = [0.0; MAX_COEFFS];
        c[0] = value;
        Jet {
            nvars: num_vars as u8,
            order: order as u8,
            c,
        }
    }

    pub fn zero(num_vars: usize, order: usize) -> Self {
        Self::constant(0.0, num_vars, order)
    }

    /// Jet of the coordinate function `u_index` at a point whose `index`-th coordinate is `value`.
    pub fn variable(index: usize, value: f64, num_vars: usize, order: usize) -> Result<Self> {
        if index >= num_vars {
            return Err(GeomError::VariableIndex { index, num_vars });
        }
        let mut j = Self::constant(value, num_vars, order);
        if order >= 1 {
            // degree-1 block starts at 1 and lists e_0, e_1, ... in order
            j.c[1 + index] = 1.0;
        }
        Ok(j)
    }

    /// Builds a jet from coefficients in storage order.
    pub fn from_coeffs(num_vars: usize, order: usize, coeffs: &[f64]) -> Result<Self> {
        let n = coeff_count(num_vars, order);
        if coeffs.len() != n {
            return Err(GeomError::JetShape(format!(
                "expected {n} coefficients for {num_vars} vars at order {order}, got {}",
                coeffs.len()
            )));
        }
        let mut j = Self::zero(num_vars, order);
        j.c[..n].copy_from_slice(coeffs);
        Ok(j)
    }

    #[inline]
    pub fn num_vars(&self) -> usize {
        self.nvars as usize
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order as usize
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    #[inline]
    fn len(&self) -> usize {
        layout(self.num_vars()).len_for_order[self.order()]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c[..self.len()]
    }

    /// Multi-indices matching [`Jet::coeffs`] element by element.
    pub fn multi_indices(&self) -> Vec<Vec<usize>> {
        layout(self.num_vars()).indices[..self.len()]
            .iter()
            .map(|a| a[..self.num_vars()].iter().map(|&e| e as usize).collect())
            .collect()
    }

    fn position(&self, alpha: &[usize]) -> Option<usize> {
        if alpha.len() != self.num_vars() || alpha.iter().sum::<usize>() > self.order() {
            return None;
        }
        let mut a = [0u8; MAX_VARS];
        for (dst, &src) in a.iter_mut().zip(alpha) {
            *dst = src as u8;
        }
        Some(layout(self.num_vars()).lookup[code(&a)] as usize)
    }

    /// Taylor coefficient `∂^α f / α!`; zero for multi-indices beyond the order.
    pub fn coeff(&self, alpha: &[usize]) -> f64 {
        self.position(alpha).map_or(0.0, |k| self.c[k])
    }

    /// Partial derivative `∂^α f` at the expansion point.
    pub fn partial(&self, alpha: &[usize]) -> f64 {
        let fact: f64 = alpha
            .iter()
            .map(|&a| (1..=a).product::<usize>() as f64)
            .product();
        self.coeff(alpha) * fact
    }

    /// First derivative values `∂_i f`.
    pub fn gradient(&self) -> Vec<f64> {
        (0..self.num_vars())
            .map(|v| if self.order() >= 1 { self.c[1 + v] } else { 0.0 })
            .collect()
    }

    /// Drops every coefficient above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order());
        let n = coeff_count(self.num_vars(), order);
        let mut out = Jet::zero(self.num_vars(), order);
        out.c[..n].copy_from_slice(&self.c[..n]);
        out
    }

    /// Jet of `∂f/∂u_var`, one order lower.
    pub fn d(&self, var: usize) -> Jet {
        assert!(var < self.num_vars(), "derivative variable out of range");
        if self.order() == 0 {
            return Jet::zero(self.num_vars(), 0);
        }
        let lay = layout(self.num_vars());
        let order = self.order() - 1;
        let mut out = Jet::zero(self.num_vars(), order);
        for (k, &(src, fac)) in lay.derivs[var][..lay.len_for_order[order]].iter().enumerate() {
            out.c[k] = fac * self.c[src as usize];
        }
        out
    }

    fn check_shape(&self, other: &Jet) {
        assert_eq!(self.nvars, other.nvars, "jets in different numbers of variables");
    }

    fn binary_order(&self, other: &Jet) -> usize {
        self.check_shape(other);
        self.order().min(other.order())
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        let order = self.binary_order(other);
        let lay = layout(self.num_vars());
        let mut out = Jet::zero(self.num_vars(), order);
        for &(i, j, k) in &lay.products[order] {
            out.c[k as usize] += self.c[i as usize] * other.c[j as usize];
        }
        out
    }

    /// `f ∘ self` given the derivatives `f^(k)(a)` at the constant term `a`.
    fn compose(&self, derivs: &[f64; MAX_ORDER + 1]) -> Jet {
        let order = self.order();
        let mut h = *self;
        h.c[0] = 0.0;
        let mut out = Jet::constant(derivs[0], self.num_vars(), order);
        let mut pow = Jet::constant(1.0, self.num_vars(), order);
        let mut fact = 1.0;
        for k in 1..=order {
            pow = pow.mul_jet(&h);
            fact *= k as f64;
            let s = derivs[k] / fact;
            if s != 0.0 {
                for (o, p) in out.c[..self.len()].iter_mut().zip(&pow.c[..self.len()]) {
                    *o += s * p;
                }
            }
        }
        out
    }

    pub fn apply(&self, f: Elementary) -> Result<Jet> {
        let a = self.value();
        let d = match f {
            Elementary::Sin => {
                let (s, c) = a.sin_cos();
                [s, c, -s, -c, s]
            }
            Elementary::Cos => {
                let (s, c) = a.sin_cos();
                [c, -s, -c, s, c]
            }
            Elementary::Exp => [a.exp(); MAX_ORDER + 1],
            Elementary::Log => {
                if !(a > 0.0) {
                    return Err(GeomError::Domain { func: "log", value: a });
                }
                let r = 1.0 / a;
                [a.ln(), r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r]
            }
            Elementary::Sqrt => {
                if !(a > 0.0) {
                    return Err(GeomError::Domain { func: "sqrt", value: a });
                }
                return Ok(self.compose(&power_derivs(a, 0.5)));
            }
            Elementary::Atan => {
                let q = 1.0 / (1.0 + a * a);
                [
                    a.atan(),
                    q,
                    -2.0 * a * q * q,
                    (6.0 * a * a - 2.0) * q * q * q,
                    24.0 * a * (1.0 - a * a) * q * q * q * q,
                ]
            }
        };
        Ok(self.compose(&d))
    }

    pub fn sin(&self) -> Jet {
        self.apply(Elementary::Sin).expect("sin is total")
    }

    pub fn cos(&self) -> Jet {
        self.apply(Elementary::Cos).expect("cos is total")
    }

    pub fn exp(&self) -> Jet {
        self.apply(Elementary::Exp).expect("exp is total")
    }

    pub fn atan(&self) -> Jet {
        self.apply(Elementary::Atan).expect("atan is total")
    }

    pub fn ln(&self) -> Result<Jet> {
        self.apply(Elementary::Log)
    }

    pub fn sqrt(&self) -> Result<Jet> {
        self.apply(Elementary::Sqrt)
    }

    /// Real power with a constant exponent. Integer exponents accept any base
    /// (nonzero when negative); other exponents need a positive constant term.
    pub fn powf(&self, c: f64) -> Result<Jet> {
        if c.fract() == 0.0 && c.abs() <= 64.0 {
            return self.powi(c as i32);
        }
        let a = self.value();
        if !(a > 0.0) {
            return Err(GeomError::Domain { func: "pow", value: a });
        }
        Ok(self.compose(&power_derivs(a, c)))
    }

    pub fn powi(&self, n: i32) -> Result<Jet> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut out = Jet::constant(1.0, self.num_vars(), self.order());
        let mut base = *self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul_jet(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_jet(&base);
            }
        }
        Ok(out)
    }

    pub fn recip(&self) -> Result<Jet> {
        let a = self.value();
        if a == 0.0 || !a.is_finite() {
            return Err(GeomError::Domain { func: "recip", value: a });
        }
        let r = 1.0 / a;
        Ok(self.compose(&[r, -r * r, 2.0 * r.powi(3), -6.0 * r.powi(4), 24.0 * r.powi(5)]))
    }

    pub fn checked_div(&self, other: &Jet) -> Result<Jet> {
        Ok(self.mul_jet(&other.recip()?))
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = *self;
        let n = self.len();
        out.c[..n].iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn max_abs_diff(&self, other: &Jet) -> f64 {
        let order = self.binary_order(other);
        let n = coeff_count(self.num_vars(), order);
        self.c[..n]
            .iter()
            .zip(&other.c[..n])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn power_derivs(a: f64, c: f64) -> [f64; MAX_ORDER + 1] {
    let mut d = [0.0; MAX_ORDER + 1];
    let mut coef = 1.0;
    for (k, slot) in d.iter_mut().enumerate() {
        *slot = coef * a.powf(c - k as f64);
        coef *= c - k as f64;
    }
    d
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let order = self.binary_order(&rhs);
        let mut out = self.truncate(order);
        let n = out.len();
        for (o, r) in out.c[..n].iter_mut().zip(&rhs.c[..n]) {
            *o += r;
        }
        out
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.mul_jet(&rhs)
    }
}

/// Panics on a zero constant term in the divisor; use [`Jet::checked_div`] to handle that case.
impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        self.checked_div(&rhs).expect("jet division by a zero constant term")
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs.scale(self)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.scale(1.0 / rhs)
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = *self - rhs;
    }
}

impl MulAssign for Jet {
    fn mul_assign(&mut self, rhs: Jet) {
        *self = *self * rhs;
    }
}
