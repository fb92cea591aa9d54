//! Bessel functions of the first kind for integer order.
//!
//! Values come from Miller's backward recurrence normalised with
//! `J_0 + 2 * sum_k J_2k = 1`, which is stable for every real argument and
//! gives a whole ladder of orders from a single sweep.

/// `J_0(x), J_1(x), ..., J_nmax(x)`.
pub fn bessel_j_ladder(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let big = nmax.max(ax.ceil() as usize);
    let mut start = big + 16 + (40.0 * big as f64).sqrt() as usize;
    if start % 2 == 1 {
        start += 1;
    }

    let mut above = 0.0;
    let mut cur = 1e-30;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        if k <= nmax {
            out[k] = cur;
        }
        if k % 2 == 0 {
            norm += 2.0 * cur;
        }
        let below = (2.0 * k as f64 / ax) * cur - above;
        above = cur;
        cur = below;
        if cur.abs() > 1e250 {
            const S: f64 = 1e-250;
            cur *= S;
            above *= S;
            norm *= S;
            for v in out.iter_mut() {
                *v *= S;
            }
        }
    }
    out[0] = cur;
    norm += cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
    if x < 0.0 {
        for v in out.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
    }
    out
}

/// `J_n(x)` for any integer order.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let m = n.unsigned_abs() as usize;
    let v = bessel_j_ladder(m, x)[m];
    if n < 0 && m % 2 == 1 {
        -v
    } else {
        v
    }
}

/// First `count` positive zeros of `J_m`.
pub fn bessel_j_zeros(m: u32, count: usize) -> Vec<f64> {
    let order = m as i32;
    let f = |x: f64| bessel_j(order, x);
    let mut zeros = Vec::with_capacity(count);
    let step = 0.25;
    let mut a = if m == 0 { 0.5 } else { m as f64 + 0.5 };
    let mut fa = f(a);
    while zeros.len() < count {
        let b = a + step;
        let fb = f(b);
        if fa == 0.0 {
            zeros.push(a);
        } else if fa.signum() != fb.signum() {
            zeros.push(bisect(&f, a, b, fa));
        }
        a = b;
        fa = fb;
    }
    zeros
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Energy `sum_{|m| > margin} J_m(x)^2` carried by orders beyond `margin`.
pub fn bessel_tail_energy(margin: usize, x: f64) -> f64 {
    let nmax = margin + 40 + 2 * x.abs().ceil() as usize;
    let ladder = bessel_j_ladder(nmax, x);
    2.0 * ladder[margin + 1..].iter().map(|v| v * v).sum::<f64>()
}
