//! Univariate B-spline / NURBS kernel.
//!
//! Knot vectors are open (clamped) and live on a closed parameter interval,
//! normally `[0, 1]`. Geometry is one-dimensional: a [`Curve`] maps the
//! parameter to the physical beam axis through its control abscissae and
//! weights. Refinement (knot insertion, degree elevation and their
//! combination) is exact: the geometry map is unchanged pointwise.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NurbsError {
    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("parameter {xi} outside knot range [{lo}, {hi}]")]
    OutOfRange { xi: f64, lo: f64, hi: f64 },
    #[error("degree must be at least 1 and element count at least 1 (got p={degree}, elements={elements})")]
    BadDiscretization { degree: usize, elements: usize },
    #[error("cannot insert knot {0}: it is an end knot or outside the range")]
    InsertAtEnd(f64),
    #[error("cannot insert knot {xi}: multiplicity would exceed degree {degree}")]
    MultiplicityOverflow { xi: f64, degree: usize },
    #[error("knot {0} is not removable within tolerance")]
    NotRemovable(f64),
    #[error("zero weighting function at {0}")]
    ZeroWeight(f64),
    #[error("non-positive Jacobian {jacobian} at parameter {xi}")]
    NonPositiveJacobian { xi: f64, jacobian: f64 },
    #[error("target degree {target} is below the current degree {current}")]
    DegreeDecrease { current: usize, target: usize },
    #[error("k-refinement requires a single-element curve, got {0} elements")]
    AlreadyRefined(usize),
}

pub type Result<T> = std::result::Result<T, NurbsError>;

/// Open, non-decreasing knot sequence together with the polynomial degree.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
}

impl KnotVector {
    /// Validates and wraps a knot sequence.
    ///
    /// The first and last knots must each appear exactly `degree + 1` times
    /// and interior knots at most `degree` times.
    pub fn new(knots: Vec<f64>, degree: usize) -> Result<Self> {
        let p = degree;
        if knots.len() < 2 * (p + 1) {
            return Err(NurbsError::InvalidKnots(format!(
                "need at least {} knots for degree {p}, got {}",
                2 * (p + 1),
                knots.len()
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(NurbsError::InvalidKnots("non-finite knot".into()));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(NurbsError::InvalidKnots("knots must be non-decreasing".into()));
        }
        let lo = knots[0];
        let hi = knots[knots.len() - 1];
        if lo >= hi {
            return Err(NurbsError::InvalidKnots("empty parameter range".into()));
        }
        let kv = Self { knots, degree };
        let mults = kv.distinct();
        let (first, last) = (mults[0].1, mults[mults.len() - 1].1);
        if first != p + 1 || last != p + 1 {
            return Err(NurbsError::InvalidKnots(format!(
                "end knots must have multiplicity {} (got {first} and {last})",
                p + 1
            )));
        }
        if let Some(&(u, m)) = mults[1..mults.len() - 1].iter().find(|(_, m)| *m > p) {
            return Err(NurbsError::InvalidKnots(format!(
                "interior knot {u} has multiplicity {m} > degree {p}"
            )));
        }
        Ok(kv)
    }

    /// Open uniform knot vector on `[0, 1]` with `num_elements` equal spans.
    pub fn open_uniform(degree: usize, num_elements: usize) -> Result<Self> {
        if degree == 0 || num_elements == 0 {
            return Err(NurbsError::BadDiscretization {
                degree,
                elements: num_elements,
            });
        }
        let mut knots = vec![0.0; degree + 1];
        knots.extend((1..num_elements).map(|i| i as f64 / num_elements as f64));
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        Self::new(knots, degree)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of basis functions `n`; the knot count is always `n + p + 1`.
    pub fn num_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn first(&self) -> f64 {
        self.knots[0]
    }

    pub fn last(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    /// Distinct knot values with their multiplicities, in ascending order.
    pub fn distinct(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &k in &self.knots {
            match out.last_mut() {
                Some((u, m)) if *u == k => *m += 1,
                _ => out.push((k, 1)),
            }
        }
        out
    }

    pub fn multiplicity(&self, xi: f64) -> usize {
        self.knots.iter().filter(|&&k| k == xi).count()
    }

    /// Knot-span indices `i` with `knots[i] < knots[i + 1]`; one per element.
    pub fn element_spans(&self) -> Vec<usize> {
        (self.degree..self.num_basis())
            .filter(|&i| self.knots[i] < self.knots[i + 1])
            .collect()
    }

    pub fn num_elements(&self) -> usize {
        self.element_spans().len()
    }

    /// Returns `i` with `knots[i] <= xi < knots[i + 1]`. The right end of the
    /// range maps to the last non-zero span.
    pub fn find_span(&self, xi: f64) -> Result<usize> {
        let (lo, hi) = (self.first(), self.last());
        if !(lo..=hi).contains(&xi) {
            return Err(NurbsError::OutOfRange { xi, lo, hi });
        }
        let n = self.num_basis();
        if xi >= self.knots[n] {
            return Ok(n - 1);
        }
        let (mut low, mut high) = (self.degree, n);
        let mut mid = (low + high) / 2;
        while xi < self.knots[mid] || xi >= self.knots[mid + 1] {
            if xi < self.knots[mid] {
                high = mid;
            } else {
                low = mid;
            }
            mid = (low + high) / 2;
        }
        Ok(mid)
    }

    /// The `p + 1` non-zero B-spline basis values and first derivatives.
    pub fn eval_basis(&self, xi: f64) -> Result<BasisEval> {
        let span = self.find_span(xi)?;
        let p = self.degree;
        let values = basis_funs(&self.knots, span, xi, p);
        let mut derivs = vec![0.0; p + 1];
        if p > 0 {
            let lower = basis_funs(&self.knots, span, xi, p - 1);
            let pf = p as f64;
            for (r, d) in derivs.iter_mut().enumerate() {
                let i = span - p + r;
                let mut acc = 0.0;
                if r >= 1 {
                    acc += lower[r - 1] / (self.knots[i + p] - self.knots[i]);
                }
                if r < p {
                    acc -= lower[r] / (self.knots[i + p + 1] - self.knots[i + 1]);
                }
                *d = pf * acc;
            }
        }
        Ok(BasisEval {
            span,
            values,
            derivs,
        })
    }
}

/// Non-zero degree-`p` basis values on knot span `span` (triangular
/// Cox–de Boor scheme). `p` may be lower than the knot vector's degree.
fn basis_funs(knots: &[f64], span: usize, xi: f64, p: usize) -> Vec<f64> {
    let mut n = vec![0.0; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    n[0] = 1.0;
    for j in 1..=p {
        left[j] = xi - knots[span + 1 - j];
        right[j] = knots[span + j] - xi;
        let mut saved = 0.0;
        for r in 0..j {
            let temp = n[r] / (right[r + 1] + left[j - r]);
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    n
}

/// Non-zero basis values and parametric first derivatives at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisEval {
    /// Knot-span index; active functions are `span - p ..= span`.
    pub span: usize,
    pub values: Vec<f64>,
    /// Derivatives per unit parameter.
    pub derivs: Vec<f64>,
}

impl BasisEval {
    pub fn degree(&self) -> usize {
        self.values.len() - 1
    }

    /// Global index of the first active basis function.
    pub fn first_index(&self) -> usize {
        self.span - self.degree()
    }
}

/// NURBS curve mapping the parameter onto the beam axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    control_x: Vec<f64>,
    weights: Vec<f64>,
    kv: KnotVector,
}

/// Physical coordinate and Jacobian `dx/dξ` at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryPoint {
    pub x: f64,
    pub jacobian: f64,
}

impl Curve {
    pub fn new(control_x: Vec<f64>, weights: Vec<f64>, kv: KnotVector) -> Result<Self> {
        let n = kv.num_basis();
        if control_x.len() != n || weights.len() != n {
            return Err(NurbsError::InvalidCurve(format!(
                "expected {n} control points and weights, got {} and {}",
                control_x.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(NurbsError::InvalidCurve("weights must be positive".into()));
        }
        if control_x.iter().any(|x| !x.is_finite()) {
            return Err(NurbsError::InvalidCurve("non-finite control point".into()));
        }
        if control_x.windows(2).any(|w| w[1] < w[0]) {
            return Err(NurbsError::InvalidCurve(
                "control abscissae must be non-decreasing".into(),
            ));
        }
        Ok(Self {
            control_x,
            weights,
            kv,
        })
    }

    /// Polynomial curve (unit weights).
    pub fn polynomial(control_x: Vec<f64>, kv: KnotVector) -> Result<Self> {
        let weights = vec![1.0; control_x.len()];
        Self::new(control_x, weights, kv)
    }

    /// Coarsest straight beam of length `length`: one linear element.
    pub fn straight(length: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(NurbsError::InvalidCurve(format!(
                "beam length must be positive, got {length}"
            )));
        }
        let kv = KnotVector::new(vec![0.0, 0.0, 1.0, 1.0], 1)?;
        Self::polynomial(vec![0.0, length], kv)
    }

    pub fn control_x(&self) -> &[f64] {
        &self.control_x
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn knot_vector(&self) -> &KnotVector {
        &self.kv
    }

    pub fn degree(&self) -> usize {
        self.kv.degree()
    }

    pub fn num_control_points(&self) -> usize {
        self.control_x.len()
    }

    /// Rational basis `R_i = N_i q_i / W` with quotient-rule derivatives.
    pub fn eval_nurbs(&self, xi: f64) -> Result<BasisEval> {
        let mut be = self.kv.eval_basis(xi)?;
        let first = be.first_index();
        let q = &self.weights[first..first + be.values.len()];
        if q.iter().all(|&w| w == 1.0) {
            return Ok(be);
        }
        let w: f64 = be.values.iter().zip(q).map(|(n, q)| n * q).sum();
        let dw: f64 = be.derivs.iter().zip(q).map(|(d, q)| d * q).sum();
        if w == 0.0 {
            return Err(NurbsError::ZeroWeight(xi));
        }
        for ((n, d), &qi) in be.values.iter_mut().zip(be.derivs.iter_mut()).zip(q) {
            let (ni, di) = (*n, *d);
            *n = ni * qi / w;
            *d = qi * (di * w - ni * dw) / (w * w);
        }
        Ok(be)
    }

    /// Physical coordinate `x(ξ)` and Jacobian `dx/dξ`.
    pub fn geometry_map(&self, xi: f64) -> Result<GeometryPoint> {
        let be = self.eval_nurbs(xi)?;
        self.map_with(&be, xi)
    }

    pub(crate) fn map_with(&self, be: &BasisEval, xi: f64) -> Result<GeometryPoint> {
        let cx = &self.control_x[be.first_index()..=be.span];
        let x = be.values.iter().zip(cx).map(|(r, x)| r * x).sum();
        let jacobian: f64 = be.derivs.iter().zip(cx).map(|(d, x)| d * x).sum();
        if !(jacobian > 0.0) {
            return Err(NurbsError::NonPositiveJacobian { xi, jacobian });
        }
        Ok(GeometryPoint { x, jacobian })
    }

    /// Greville abscissae of the control points, mapped to physical space.
    /// For the straight beams used here these equal the control abscissae.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree();
        let k = self.kv.knots();
        (0..self.num_control_points())
            .map(|i| {
                if p == 0 {
                    k[i]
                } else {
                    k[i + 1..=i + p].iter().sum::<f64>() / p as f64
                }
            })
            .collect()
    }

    fn homogeneous(&self) -> Vec<[f64; 2]> {
        self.control_x
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| [x * w, *w])
            .collect()
    }

    fn from_homogeneous(pts: &[[f64; 2]], kv: KnotVector) -> Result<Self> {
        let control_x = pts.iter().map(|p| p[0] / p[1]).collect();
        let weights = pts.iter().map(|p| p[1]).collect();
        Self::new(control_x, weights, kv)
    }

    /// Inserts one knot (Boehm's algorithm in homogeneous coordinates).
    pub fn insert_knot(&self, xi_new: f64) -> Result<Self> {
        let p = self.degree();
        if !(xi_new > self.kv.first() && xi_new < self.kv.last()) {
            return Err(NurbsError::InsertAtEnd(xi_new));
        }
        if self.kv.multiplicity(xi_new) + 1 > p {
            return Err(NurbsError::MultiplicityOverflow {
                xi: xi_new,
                degree: p,
            });
        }
        let mut knots = self.kv.knots.clone();
        let mut pts = self.homogeneous();
        insert_homogeneous(&mut knots, &mut pts, p, xi_new);
        Self::from_homogeneous(&pts, KnotVector::new(knots, p)?)
    }

    /// Raises the degree by one, increasing every distinct knot's
    /// multiplicity by one. Done by Bézier extraction, Bernstein degree
    /// raising of each segment, and removal of the surplus interior knots.
    pub fn elevate_degree(&self) -> Result<Self> {
        let p = self.degree();
        let distinct = self.kv.distinct();
        let interior = &distinct[1..distinct.len() - 1];

        let mut knots = self.kv.knots.clone();
        let mut pts = self.homogeneous();
        for &(u, m) in interior {
            for _ in m..p {
                insert_homogeneous(&mut knots, &mut pts, p, u);
            }
        }

        let segments = distinct.len() - 1;
        debug_assert_eq!(pts.len(), segments * p + 1);
        let q = p + 1;
        let mut raised: Vec<[f64; 2]> = Vec::with_capacity(segments * q + 1);
        for s in 0..segments {
            let seg = &pts[s * p..=s * p + p];
            let start = if s == 0 { 0 } else { 1 };
            for i in start..=q {
                let a = i as f64 / q as f64;
                let mut pt = [0.0; 2];
                for c in 0..2 {
                    let prev = if i > 0 { seg[i - 1][c] } else { 0.0 };
                    let cur = if i < q { seg[i][c] } else { 0.0 };
                    pt[c] = a * prev + (1.0 - a) * cur;
                }
                raised.push(pt);
            }
        }

        let mut new_knots = vec![distinct[0].0; q + 1];
        for &(u, _) in interior {
            new_knots.extend(std::iter::repeat_n(u, q));
        }
        new_knots.extend(std::iter::repeat_n(distinct[segments].0, q + 1));

        for &(u, m) in interior {
            for _ in m..p {
                remove_homogeneous(&mut new_knots, &mut raised, q, u)?;
            }
        }
        Self::from_homogeneous(&raised, KnotVector::new(new_knots, q)?)
    }

    fn elevate_to(&self, target_p: usize) -> Result<Self> {
        let p = self.degree();
        if target_p < p {
            return Err(NurbsError::DegreeDecrease {
                current: p,
                target: target_p,
            });
        }
        let mut c = self.clone();
        for _ in p..target_p {
            c = c.elevate_degree()?;
        }
        Ok(c)
    }

    fn insert_uniform(&self, elements: usize) -> Result<Self> {
        let (a, b) = (self.kv.first(), self.kv.last());
        let mut c = self.clone();
        for i in 1..elements {
            c = c.insert_knot(a + (b - a) * i as f64 / elements as f64)?;
        }
        Ok(c)
    }

    fn check_coarsest(&self, target_p: usize, elements: usize) -> Result<()> {
        if target_p == 0 || elements == 0 {
            return Err(NurbsError::BadDiscretization {
                degree: target_p,
                elements,
            });
        }
        let e = self.kv.num_elements();
        if e != 1 {
            return Err(NurbsError::AlreadyRefined(e));
        }
        Ok(())
    }

    /// k-refinement: elevate the single-element curve to `target_p`, then
    /// insert uniform interior knots. Interior continuity is `C^(p-1)`.
    pub fn k_refine(&self, target_p: usize, target_elements: usize) -> Result<Self> {
        self.check_coarsest(target_p, target_elements)?;
        self.elevate_to(target_p)?.insert_uniform(target_elements)
    }

    /// Insert uniform knots first, then elevate: interior continuity stays at
    /// that of the starting degree (`C^0` from a linear curve), as in
    /// classical h/p finite elements.
    pub fn insert_then_elevate(&self, target_p: usize, target_elements: usize) -> Result<Self> {
        self.check_coarsest(target_p, target_elements)?;
        if target_p < self.degree() {
            return Err(NurbsError::DegreeDecrease {
                current: self.degree(),
                target: target_p,
            });
        }
        self.insert_uniform(target_elements)?.elevate_to(target_p)
    }
}

/// Single knot insertion on raw homogeneous data. Caller guarantees
/// `xi` is interior and the multiplicity stays `<= p`.
fn insert_homogeneous(knots: &mut Vec<f64>, pts: &mut Vec<[f64; 2]>, p: usize, xi: f64) {
    let n = pts.len();
    let k = {
        // last index with knots[k] <= xi, restricted to a non-zero span
        let mut k = p;
        while k + 1 < n && knots[k + 1] <= xi {
            k += 1;
        }
        k
    };
    let s = knots.iter().filter(|&&u| u == xi).count();
    let mut out = Vec::with_capacity(n + 1);
    out.extend_from_slice(&pts[..=k - p]);
    for i in k - p + 1..=k - s {
        let alpha = (xi - knots[i]) / (knots[i + p] - knots[i]);
        out.push([
            alpha * pts[i][0] + (1.0 - alpha) * pts[i - 1][0],
            alpha * pts[i][1] + (1.0 - alpha) * pts[i - 1][1],
        ]);
    }
    out.extend_from_slice(&pts[k - s..]);
    *pts = out;
    knots.insert(k + 1, xi);
}

/// Removes one copy of interior knot `u` from a degree-`p` curve known to
/// have the continuity that makes it removable.
fn remove_homogeneous(
    knots: &mut Vec<f64>,
    pts: &mut Vec<[f64; 2]>,
    p: usize,
    u: f64,
) -> Result<()> {
    let r = knots
        .iter()
        .rposition(|&k| k == u)
        .ok_or(NurbsError::NotRemovable(u))?;
    let s = knots.iter().filter(|&&k| k == u).count();
    let first = r - p;
    let last = r - s;
    let alpha = |i: usize| (u - knots[i]) / (knots[i + p + 1] - knots[i]);

    // Unknowns Q_first .. Q_{last-1}; neighbours fixed on both sides.
    let count = last - first;
    let mut q = vec![[0.0; 2]; count + 2];
    q[0] = pts[first - 1];
    q[count + 1] = pts[last + 1];
    let n_left = count.div_ceil(2);
    for j in 1..=n_left {
        let i = first + j - 1;
        let a = alpha(i);
        for c in 0..2 {
            q[j][c] = (pts[i][c] - (1.0 - a) * q[j - 1][c]) / a;
        }
    }
    for j in (n_left + 1..=count).rev() {
        let i = first + j;
        let a = alpha(i);
        for c in 0..2 {
            q[j][c] = (pts[i][c] - a * q[j + 1][c]) / (1.0 - a);
        }
    }
    // The equation at the meeting point is unused by either sweep.
    let i = first + n_left;
    let a = alpha(i);
    let scale = pts.iter().map(|p| p[0].abs().max(p[1].abs())).fold(1.0, f64::max);
    for c in 0..2 {
        let resid = pts[i][c] - (a * q[n_left + 1][c] + (1.0 - a) * q[n_left][c]);
        if resid.abs() > 1e-9 * scale {
            return Err(NurbsError::NotRemovable(u));
        }
    }

    let mut out = Vec::with_capacity(pts.len() - 1);
    out.extend_from_slice(&pts[..first]);
    out.extend_from_slice(&q[1..=count]);
    out.extend_from_slice(&pts[last + 1..]);
    *pts = out;
    knots.remove(r);
    Ok(())
}
