//! One-dimensional feature detection: dips, peaks, and bracketed minimization.

use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dip<T> {
    /// Grid index of the sampled minimum.
    pub index: usize,
    /// Sub-grid location from a three-point parabola.
    pub location: T,
    /// Full width at half prominence.
    pub width: T,
    pub prominence: T,
    /// Sampled value at the minimum.
    pub value: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DipSettings<T> {
    /// Minimum prominence as a fraction of the series' dynamic range.
    pub min_prominence_fraction: T,
    /// Series whose dynamic range does not exceed this are treated as flat.
    pub noise_floor: T,
}

impl<T: Scalar> Default for DipSettings<T> {
    fn default() -> Self {
        Self { min_prominence_fraction: T::lit(0.1), noise_floor: T::zero() }
    }
}

/// Vertex abscissa of the parabola through three points, clamped to the
/// outer pair.
pub fn parabola_vertex<T: Scalar>(x: [T; 3], y: [T; 3]) -> T {
    let (x0, x1, x2) = (x[0], x[1], x[2]);
    let (y0, y1, y2) = (y[0], y[1], y[2]);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curv = (d12 - d01) / (x2 - x0);
    if !(curv.abs() > T::zero()) || !curv.is_finite() {
        return x1;
    }
    let two = T::lit(2.0);
    let v = (x0 + x1) / two - d01 / (two * curv);
    v.max(x0).min(x2)
}

/// Local minima of `y` sampled at strictly increasing `x`, filtered by
/// topographic prominence.
pub fn detect_dips<T: Scalar>(x: &[T], y: &[T], settings: &DipSettings<T>) -> Vec<Dip<T>> {
    let n = x.len().min(y.len());
    if n < 3 {
        return Vec::new();
    }
    let (mut lo, mut hi) = (y[0], y[0]);
    for &v in &y[..n] {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let range = hi - lo;
    if !(range > settings.noise_floor) || !range.is_finite() {
        return Vec::new();
    }
    let threshold = settings.min_prominence_fraction * range;
    let half = T::lit(0.5);

    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if !(y[i] < y[i - 1]) {
            i += 1;
            continue;
        }
        // Extend across a flat bottom.
        let mut j = i;
        while j + 1 < n && y[j + 1] == y[i] {
            j += 1;
        }
        if j + 1 >= n || !(y[j + 1] > y[i]) {
            i = j + 1;
            continue;
        }
        let v = y[i];
        let mut left_max = v;
        let mut l = i;
        while l > 0 && !(y[l - 1] < v) {
            l -= 1;
            left_max = left_max.max(y[l]);
        }
        let mut right_max = v;
        let mut r = j;
        while r + 1 < n && !(y[r + 1] < v) {
            r += 1;
            right_max = right_max.max(y[r]);
        }
        let prominence = left_max.min(right_max) - v;
        if prominence >= threshold && prominence > T::zero() {
            let level = v + prominence * half;
            // Both shoulders rise to at least `level`, so these scans stop
            // inside the grid.
            let mut a = i;
            while y[a - 1] < level {
                a -= 1;
            }
            let xl = interp_crossing(x[a - 1], y[a - 1], x[a], y[a], level);
            let mut b = j;
            while y[b + 1] < level {
                b += 1;
            }
            let xr = interp_crossing(x[b], y[b], x[b + 1], y[b + 1], level);
            let location = if j == i {
                parabola_vertex([x[i - 1], x[i], x[i + 1]], [y[i - 1], y[i], y[i + 1]])
            } else {
                (x[i] + x[j]) * half
            };
            out.push(Dip {
                index: (i + j) / 2,
                location,
                width: xr - xl,
                prominence,
                value: v,
            });
        }
        i = j + 1;
    }
    out
}

fn interp_crossing<T: Scalar>(x0: T, y0: T, x1: T, y1: T, level: T) -> T {
    if y1 == y0 {
        return x0;
    }
    let t = (level - y0) / (y1 - y0);
    x0 + (x1 - x0) * t.max(T::zero()).min(T::one())
}

/// Local maxima, reported with positive prominence.
pub fn detect_peaks<T: Scalar>(x: &[T], y: &[T], settings: &DipSettings<T>) -> Vec<Dip<T>> {
    let neg: Vec<T> = y.iter().map(|&v| -v).collect();
    detect_dips(x, &neg, settings)
        .into_iter()
        .map(|d| Dip { value: -d.value, ..d })
        .collect()
}

/// Golden-section minimization of `f` on `[a, b]` to abscissa tolerance
/// `tol`. Returns `(x, f(x))`.
pub fn golden_section<T: Scalar>(mut f: impl FnMut(T) -> T, a: T, b: T, tol: T) -> (T, T) {
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = f(c);
    let mut fd = f(d);
    let mut guard = 0;
    while (b - a) > tol && guard < 200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
        guard += 1;
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_has_no_dips() {
        let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        assert!(detect_dips(&x, &y, &DipSettings::default()).is_empty());
    }

    #[test]
    fn parabolic_dip_recovered() {
        let h = 0.01;
        let x0 = 0.503_7;
        let x: Vec<f64> = (0..101).map(|i| i as f64 * h).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 + (v - x0).powi(2)).collect();
        let d = detect_dips(&x, &y, &DipSettings::default());
        assert_eq!(d.len(), 1);
        assert!((d[0].location - x0).abs() < 1e-3 * h);
    }

    #[test]
    fn width_at_half_prominence() {
        let x: Vec<f64> = (0..2001).map(|i| -10.0 + i as f64 * 0.01).collect();
        // Lorentzian dip of half width 0.5 on a unit baseline.
        let y: Vec<f64> = x.iter().map(|v| 1.0 - 0.25 / (v * v + 0.25)).collect();
        let d = detect_dips(&x, &y, &DipSettings::default());
        assert_eq!(d.len(), 1);
        // Prominence is measured against the lower of the two edge maxima.
        let p = d[0].prominence;
        let level = d[0].value + p / 2.0;
        let expect = 2.0 * (0.25 / (1.0 - level) - 0.25f64).sqrt();
        assert!((d[0].width - expect).abs() < 2e-3);
    }

    #[test]
    fn golden_finds_quadratic_minimum() {
        let (x, _) = golden_section(|x: f64| (x - 1.234_567).powi(2), 0.0, 3.0, 1e-9);
        assert!((x - 1.234_567).abs() < 1e-8);
        let (x32, _) = golden_section(|x: f32| (x - 0.5).abs(), 0.0, 1.0, 1e-5);
        assert!((x32 - 0.5).abs() < 1e-4);
    }

    #[test]
    fn peaks_are_negated_dips() {
        let x: Vec<f64> = (0..21).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| (-(v - 10.0).powi(2)).exp()).collect();
        let p = detect_peaks(&x, &y, &DipSettings::default());
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].index, 10);
        assert!(p[0].prominence > 0.9);
    }
}
