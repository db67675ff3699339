//! Zeros of determinant-like analytic functions in rectangles of the
//! spectral plane: argument-principle counting, quadtree isolation, Newton
//! refinement, real-axis eigenvalue scans and the counting-function and
//! Jensen diagnostics.
//!
//! The function being searched is only available pointwise, in log form
//! (`log|f|`, `arg f`), through the [`DetFn`] trait.

use crate::error::{Error, Result};
use crate::linalg::{wrap_angle, LogDet};
use crate::spectral::Sheet;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// A function of the spectral parameter available in log form.
pub trait DetFn: Sync {
    fn eval(&self, lambda: Complex64) -> Result<LogDet>;
}

impl<F> DetFn for F
where
    F: Fn(Complex64) -> Result<LogDet> + Sync,
{
    fn eval(&self, lambda: Complex64) -> Result<LogDet> {
        self(lambda)
    }
}

/// Closed axis-aligned rectangle `[re0, re1] x [im0, im1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re: [f64; 2],
    pub im: [f64; 2],
}

impl Rect {
    pub fn new(re0: f64, re1: f64, im0: f64, im1: f64) -> Result<Self> {
        if !(re0.is_finite() && re1.is_finite() && im0.is_finite() && im1.is_finite()) || re0 >= re1 || im0 >= im1 {
            return Err(Error::ValidationError(format!("degenerate rectangle [{re0}, {re1}] x [{im0}, {im1}]")));
        }
        Ok(Rect { re: [re0, re1], im: [im0, im1] })
    }

    pub fn width(&self) -> f64 {
        self.re[1] - self.re[0]
    }

    pub fn height(&self) -> f64 {
        self.im[1] - self.im[0]
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re[0] + self.re[1]), 0.5 * (self.im[0] + self.im[1]))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re[0] && z.re <= self.re[1] && z.im >= self.im[0] && z.im <= self.im[1]
    }

    /// Distance from `z` to the rectangle (zero inside).
    pub fn distance_to(&self, z: Complex64) -> f64 {
        let dx = (self.re[0] - z.re).max(0.0).max(z.re - self.re[1]);
        let dy = (self.im[0] - z.im).max(0.0).max(z.im - self.im[1]);
        dx.hypot(dy)
    }

    /// Distance from `z` to the boundary, for `z` inside.
    fn inner_distance(&self, z: Complex64) -> f64 {
        (z.re - self.re[0]).min(self.re[1] - z.re).min(z.im - self.im[0]).min(self.im[1] - z.im)
    }

    /// The rectangle grown by the fraction `f` of its size about its center.
    pub fn dilate(&self, f: f64) -> Rect {
        let (dw, dh) = (0.5 * f * self.width(), 0.5 * f * self.height());
        Rect { re: [self.re[0] - dw, self.re[1] + dw], im: [self.im[0] - dh, self.im[1] + dh] }
    }

    /// Square of side `s` centred at `z`.
    pub fn square(z: Complex64, s: f64) -> Rect {
        Rect { re: [z.re - 0.5 * s, z.re + 0.5 * s], im: [z.im - 0.5 * s, z.im + 0.5 * s] }
    }

    /// Split at fractions `fx`, `fy` of the width and height; an axis shorter
    /// than `min_size` is not split.
    fn split(&self, fx: f64, fy: f64, min_size: f64) -> Vec<Rect> {
        let xs = if self.width() > min_size {
            let m = self.re[0] + fx * self.width();
            vec![[self.re[0], m], [m, self.re[1]]]
        } else {
            vec![self.re]
        };
        let ys = if self.height() > min_size {
            let m = self.im[0] + fy * self.height();
            vec![[self.im[0], m], [m, self.im[1]]]
        } else {
            vec![self.im]
        };
        let mut out = Vec::new();
        for y in &ys {
            for x in &xs {
                out.push(Rect { re: *x, im: *y });
            }
        }
        out
    }

    /// Reject rectangles closer than `margin` to the branch points `+-1`.
    pub fn check_branch_margin(&self, margin: f64) -> Result<()> {
        for b in [1.0, -1.0] {
            let d = self.distance_to(Complex64::new(b, 0.0));
            if d < margin {
                return Err(Error::ValidationError(format!(
                    "search rectangle passes within {d:.1e} of the branch point {b}"
                )));
            }
        }
        Ok(())
    }
}

/// Tuning of the zero search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchOptions {
    /// Initial spacing of boundary samples.
    pub sample_spacing: f64,
    /// Minimum number of segments per rectangle edge.
    pub min_edge_segments: usize,
    /// Largest accepted phase increment between adjacent samples.
    pub max_phase_step: f64,
    /// Maximum number of bisections of a boundary segment.
    pub max_refinements: usize,
    /// `|f|` below this fraction of `|f|` at an adjacent contour sample counts
    /// as a zero on the contour.
    pub boundary_floor: f64,
    /// Number of 1% dilations tried when the contour hits a zero.
    pub max_dilations: usize,
    /// Minimum rectangle side in both axes.
    pub min_box: f64,
    /// Maximum quadtree depth.
    pub max_depth: usize,
    /// Central-difference step of Newton's method relative to the box diameter.
    pub newton_rel_step: f64,
    pub newton_max_iter: usize,
    /// Newton stops when the update is below this, relative to `1 + |lambda|`.
    pub newton_tol: f64,
    /// Required `|f(root)|` relative to the largest `|f|` on the leaf boundary.
    pub residual_rel: f64,
    /// Try to resolve a leaf with count `m >= 2` as one `m`-fold zero before subdividing.
    pub detect_clusters: bool,
    /// Minimum distance of a search rectangle from the branch points.
    pub branch_margin: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            sample_spacing: 0.2,
            min_edge_segments: 2,
            max_phase_step: PI / 4.0,
            max_refinements: 14,
            boundary_floor: 1e-10,
            max_dilations: 3,
            min_box: 1e-4,
            max_depth: 24,
            newton_rel_step: 1e-3,
            newton_max_iter: 40,
            newton_tol: 1e-10,
            residual_rel: 1e-8,
            detect_clusters: true,
            branch_margin: 1e-3,
        }
    }
}

/// Outcome of an argument-principle count.
#[derive(Clone, Copy, Debug)]
pub struct ZeroCount {
    /// Rectangle actually used (dilated if the original contour hit a zero).
    pub rect: Rect,
    /// Winding number: zeros inside counted with multiplicity.
    pub count: i64,
    /// Raw winding `sum(delta arg) / 2 pi`.
    pub winding: f64,
    /// Centroid `sum(z_j)/count` of the enclosed zeros, from the contour moment.
    pub centroid: Option<Complex64>,
    /// Largest `log|f|` on the contour.
    pub max_log_abs: f64,
    /// Number of contour samples (including refinements).
    pub samples: usize,
}

/// How a zero was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Nystrom,
    RadialOracle,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Nystrom => "Nystrom",
            Method::RadialOracle => "RadialOracle",
        }
    }
}

/// A located zero of the searched function (a resonance, or an eigenvalue
/// on the Physical sheet).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub lambda: Complex64,
    pub multiplicity: usize,
    /// `|f|` at the located point.
    pub residual: f64,
    pub sheet: Sheet,
    pub method: Method,
    /// The leaf rectangle that isolated the zero.
    pub region: Rect,
    pub flags: Vec<String>,
}

/// Flag for leaves at minimum size still holding several zeros.
pub const FLAG_CLUSTER: &str = "cluster";
/// Flag for multiplicity greater than one.
pub const FLAG_DEGENERATE: &str = "degenerate";
/// Flag for a residual above the requested tolerance.
pub const FLAG_RESIDUAL: &str = "residual";
/// Flag for Newton iterations that did not meet the step tolerance.
pub const FLAG_NONCONVERGED: &str = "nonconvergence";
/// Flag for leaves whose children counts could not be made consistent.
pub const FLAG_COUNT_MISMATCH: &str = "count-mismatch";

/// A completed leaf of the quadtree with its count.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LeafCount {
    pub rect: Rect,
    pub count: i64,
}

/// Everything a search produced.
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub region: Rect,
    pub total_count: i64,
    pub zeros: Vec<Resonance>,
    pub leaves: Vec<LeafCount>,
    pub evaluations: usize,
}

impl SearchOutcome {
    /// Sum of multiplicities of the returned zeros.
    pub fn multiplicity_sum(&self) -> usize {
        self.zeros.iter().map(|z| z.multiplicity).sum()
    }
}

/// Memoising evaluator; sample points are keyed on a `2^-40` lattice so that
/// contours sharing an edge reuse each other's samples.
struct Sampler<'a> {
    f: &'a dyn DetFn,
    cache: Mutex<HashMap<(i64, i64), LogDet>>,
    evals: AtomicUsize,
}

impl<'a> Sampler<'a> {
    fn new(f: &'a dyn DetFn) -> Self {
        Sampler { f, cache: Mutex::new(HashMap::new()), evals: AtomicUsize::new(0) }
    }

    fn key(z: Complex64) -> (i64, i64) {
        const S: f64 = (1u64 << 40) as f64;
        ((z.re * S).round() as i64, (z.im * S).round() as i64)
    }

    fn eval(&self, z: Complex64) -> Result<LogDet> {
        let k = Self::key(z);
        if let Some(v) = self.cache.lock().unwrap().get(&k) {
            return Ok(*v);
        }
        let v = self.f.eval(z)?;
        self.evals.fetch_add(1, Ordering::Relaxed);
        self.cache.lock().unwrap().insert(k, v);
        Ok(v)
    }

    /// Uncached evaluation (Newton probes are never revisited).
    fn eval_fresh(&self, z: Complex64) -> Result<LogDet> {
        self.evals.fetch_add(1, Ordering::Relaxed);
        self.f.eval(z)
    }
}

fn dlog(a: LogDet, b: LogDet) -> Complex64 {
    Complex64::new(b.log_abs - a.log_abs, wrap_angle(b.arg - a.arg))
}

struct Contour {
    winding: f64,
    moment: Complex64,
    max_log_abs: f64,
    samples: usize,
}

fn contour(s: &Sampler, rect: &Rect, opts: &SearchOptions, min_segments: usize) -> Result<Contour> {
    let corners = [
        Complex64::new(rect.re[0], rect.im[0]),
        Complex64::new(rect.re[1], rect.im[0]),
        Complex64::new(rect.re[1], rect.im[1]),
        Complex64::new(rect.re[0], rect.im[1]),
    ];
    let floor = opts.boundary_floor.ln();
    let mut acc = Contour { winding: 0.0, moment: Complex64::new(0.0, 0.0), max_log_abs: f64::NEG_INFINITY, samples: 0 };
    // A sample counts as a zero on the contour when |f| there is below
    // `boundary_floor` times |f| at a neighbouring sample.
    let check = |z: Complex64, v: LogDet, reference: f64, acc: &mut Contour| -> Result<()> {
        acc.samples += 1;
        acc.max_log_abs = acc.max_log_abs.max(v.log_abs);
        if !(v.log_abs >= reference + floor) || !v.log_abs.is_finite() {
            return Err(Error::BoundaryZero { at: z, abs: v.abs() });
        }
        Ok(())
    };
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        let len = (b - a).norm();
        let n = ((len / opts.sample_spacing).ceil() as usize).max(min_segments).next_power_of_two();
        let mut za = a;
        let mut fa = s.eval(za)?;
        check(za, fa, fa.log_abs, &mut acc)?;
        for k in 1..=n {
            let zb = if k == n { b } else { a + (b - a) * (k as f64 / n as f64) };
            let fb = s.eval(zb)?;
            check(zb, fb, fa.log_abs, &mut acc)?;
            segment(s, za, fa, zb, fb, 0, opts, &mut acc, &check)?;
            za = zb;
            fa = fb;
        }
    }
    Ok(acc)
}

#[allow(clippy::too_many_arguments)]
fn segment(
    s: &Sampler,
    za: Complex64,
    fa: LogDet,
    zb: Complex64,
    fb: LogDet,
    depth: usize,
    opts: &SearchOptions,
    acc: &mut Contour,
    check: &dyn Fn(Complex64, LogDet, f64, &mut Contour) -> Result<()>,
) -> Result<()> {
    // Every accepted segment is checked against its midpoint: the two half
    // increments must be small, nearly equal and add up to the whole, which
    // guards against an increment aliased into the accepted range by
    // wrapping.
    let zm = 0.5 * (za + zb);
    let fm = s.eval(zm)?;
    check(zm, fm, fa.log_abs.max(fb.log_abs), acc)?;
    let d = dlog(fa, fb);
    let (d1, d2) = (dlog(fa, fm), dlog(fm, fb));
    let lim = opts.max_phase_step;
    // The second difference d1 - d2 (modulus and phase) is small on
    // segments far from zeros; a zero close to one half makes the
    // log-modulus increments of the two halves differ even when its phase
    // sweep is hidden by wrapping.
    let smooth = (d1 - d2).norm() < lim;
    if smooth && d.im.abs() < lim && d1.im.abs() < lim && d2.im.abs() < lim && (d1.im + d2.im - d.im).abs() < 1e-6 {
        acc.winding += d1.im + d2.im;
        // sum z_j = (1/2 pi i) \oint z dlog f, midpoint rule per half segment
        acc.moment += 0.5 * (za + zm) * d1 + 0.5 * (zm + zb) * d2;
        return Ok(());
    }
    if depth >= opts.max_refinements {
        return Err(Error::PhaseUnresolved(zm));
    }
    segment(s, za, fa, zm, fm, depth + 1, opts, acc, check)?;
    segment(s, zm, fm, zb, fb, depth + 1, opts, acc, check)
}

fn count_once(s: &Sampler, rect: &Rect, opts: &SearchOptions, min_segments: usize) -> Result<ZeroCount> {
    let c = contour(s, rect, opts, min_segments)?;
    let winding = c.winding / (2.0 * PI);
    let count = winding.round() as i64;
    if (winding - count as f64).abs() > 1e-6 {
        return Err(Error::PhaseUnresolved(rect.center()));
    }
    let centroid = if count > 0 {
        Some(c.moment / (Complex64::new(0.0, 2.0 * PI) * count as f64))
    } else {
        None
    };
    Ok(ZeroCount { rect: *rect, count, winding, centroid, max_log_abs: c.max_log_abs, samples: c.samples })
}

fn count_dilating(s: &Sampler, rect: &Rect, opts: &SearchOptions) -> Result<ZeroCount> {
    let mut last = None;
    for k in 0..=opts.max_dilations {
        let r = if k == 0 { *rect } else { rect.dilate(0.01 * k as f64) };
        match count_once(s, &r, opts, opts.min_edge_segments) {
            Err(e @ (Error::BoundaryZero { .. } | Error::PhaseUnresolved(_))) => last = Some(e),
            other => return other,
        }
    }
    Err(last.unwrap())
}

/// Number of zeros of `f` inside `rect`, counted with multiplicity, by the
/// argument principle. A contour that meets a zero is dilated by 1% up to
/// `max_dilations` times.
pub fn count_zeros(f: &dyn DetFn, rect: &Rect, opts: &SearchOptions) -> Result<ZeroCount> {
    count_dilating(&Sampler::new(f), rect, opts)
}

struct Search<'a> {
    s: Sampler<'a>,
    opts: &'a SearchOptions,
    sheet: Sheet,
    method: Method,
    zeros: Vec<Resonance>,
    leaves: Vec<LeafCount>,
}

impl<'a> Search<'a> {
    fn derivative(&self, z: Complex64, h: f64) -> Result<Complex64> {
        let fp = self.s.eval_fresh(z + h)?;
        let fm = self.s.eval_fresh(z - h)?;
        Ok(dlog(fm, fp) / (2.0 * h))
    }

    /// Newton's method for an `m`-fold zero, `z <- z - m f/f'`, started at
    /// `z0` and confined to `rect`. Returns the iterate, its value and
    /// whether it converged: either the step tolerance was met, or the
    /// iteration stalled after `|f|` fell `residual_rel` below `scale`
    /// (a multiple zero can only be located to the noise level of `f`).
    fn newton(&self, rect: &Rect, z0: Complex64, m: f64, max_iter: usize, scale: f64) -> Result<Option<(Complex64, LogDet, bool)>> {
        let opts = self.opts;
        let mut z = z0;
        let mut fz = self.s.eval_fresh(z)?;
        let mut h = opts.newton_rel_step * rect.diameter();
        let mut last_step = f64::INFINITY;
        for _ in 0..max_iter {
            let mut dl = self.derivative(z, h)?;
            let mut step = -m / dl;
            // Overshoot: the central difference is only meaningful while
            // h is well below the distance to the zero.
            while step.norm() < 4.0 * h && h > 1e-14 * (1.0 + z.norm()) {
                h *= 0.5;
                dl = self.derivative(z, h)?;
                step = -m / dl;
            }
            if !step.is_finite() {
                return Ok(None);
            }
            let mut t = 1.0;
            let (mut z1, mut f1);
            loop {
                z1 = z + step * t;
                if !rect.contains(z1) {
                    return Ok(None);
                }
                f1 = self.s.eval_fresh(z1)?;
                if f1.log_abs < fz.log_abs || t < 1.0 / 32.0 {
                    break;
                }
                t *= 0.5;
            }
            let moved = (z1 - z).norm();
            z = z1;
            fz = f1;
            if moved <= opts.newton_tol * (1.0 + z.norm()) {
                return Ok(Some((z, fz, true)));
            }
            if moved > 0.9 * last_step && last_step < 1e-6 * rect.diameter() {
                return Ok(Some((z, fz, fz.log_abs <= scale + opts.residual_rel.ln())));
            }
            last_step = moved;
            h = h.min(0.1 * moved).max(1e-14 * (1.0 + z.norm()));
        }
        Ok(Some((z, fz, false)))
    }

    fn push(&mut self, rect: &Rect, z: Complex64, m: i64, fz: LogDet, scale: f64, mut flags: Vec<String>) {
        if m > 1 {
            flags.push(FLAG_DEGENERATE.to_string());
        }
        if fz.log_abs > scale + self.opts.residual_rel.ln() {
            flags.push(FLAG_RESIDUAL.to_string());
        }
        self.zeros.push(Resonance {
            lambda: z,
            multiplicity: m as usize,
            residual: fz.abs(),
            sheet: self.sheet,
            method: self.method,
            region: *rect,
            flags,
        });
        self.leaves.push(LeafCount { rect: *rect, count: m });
    }

    /// Try to account for all `count` zeros of the leaf by one refined root.
    fn try_refine(&mut self, c: &ZeroCount) -> Result<bool> {
        let rect = c.rect;
        let m = c.count;
        let start = c.centroid.filter(|z| rect.contains(*z)).unwrap_or_else(|| rect.center());
        let max_iter = if m == 1 { self.opts.newton_max_iter } else { self.opts.newton_max_iter.min(12) };
        let Some((z, fz, converged)) = self.newton(&rect, start, m as f64, max_iter, c.max_log_abs)? else {
            return Ok(false);
        };
        if m == 1 {
            // exactly one zero in the leaf; Newton converged inside it
            if !converged && fz.log_abs > c.max_log_abs + self.opts.residual_rel.ln() {
                return Ok(false);
            }
            let flags = if converged { vec![] } else { vec![FLAG_NONCONVERGED.to_string()] };
            self.push(&rect, z, 1, fz, c.max_log_abs, flags);
            return Ok(true);
        }
        // several zeros: accept a single root only if a small contour around
        // it holds all of them. The contour is centred on a zero, so the
        // boundary floor does not apply.
        let side = (10.0 * self.opts.min_box).min(1e-2 * rect.diameter()).max(self.opts.min_box);
        if 2.0 * rect.inner_distance(z) < side {
            return Ok(false);
        }
        let small = Rect::square(z, side);
        let local = SearchOptions { boundary_floor: 0.0, ..self.opts.clone() };
        match count_once(&self.s, &small, &local, 1) {
            Ok(sc) if sc.count == m => {
                let flags = if converged { vec![] } else { vec![FLAG_NONCONVERGED.to_string()] };
                self.push(&rect, z, m, fz, c.max_log_abs, flags);
                Ok(true)
            }
            Ok(_) | Err(Error::BoundaryZero { .. }) | Err(Error::PhaseUnresolved(_)) => Ok(false),
            Err(e) => Err(e),
        }
    }

    fn isolate(&mut self, c: ZeroCount, depth: usize) -> Result<()> {
        if c.count == 0 {
            self.leaves.push(LeafCount { rect: c.rect, count: 0 });
            return Ok(());
        }
        if c.count < 0 {
            return Err(Error::ValidationError(format!("negative zero count {} (poles inside?)", c.count)));
        }
        let rect = c.rect;
        if (c.count == 1 || self.opts.detect_clusters) && self.try_refine(&c)? {
            return Ok(());
        }
        let min_box = self.opts.min_box;
        if (rect.width() <= min_box && rect.height() <= min_box) || depth >= self.opts.max_depth {
            let z = rect.center();
            let fz = self.s.eval(z)?;
            self.push(&rect, z, c.count, fz, c.max_log_abs, vec![FLAG_CLUSTER.to_string()]);
            return Ok(());
        }
        // Split; if a child contour meets a zero or the child counts do not
        // add up, move the split lines slightly and try again.
        for (fx, fy) in [(0.5, 0.5), (0.513, 0.487), (0.471, 0.529), (0.537, 0.459)] {
            let children = rect.split(fx, fy, min_box);
            let mut counts = Vec::with_capacity(children.len());
            let mut ok = true;
            for ch in &children {
                match count_once(&self.s, ch, self.opts, self.opts.min_edge_segments) {
                    Ok(cc) => counts.push(cc),
                    Err(Error::BoundaryZero { .. }) | Err(Error::PhaseUnresolved(_)) => {
                        ok = false;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if ok && counts.iter().map(|cc| cc.count).sum::<i64>() == c.count {
                for cc in counts {
                    self.isolate(cc, depth + 1)?;
                }
                return Ok(());
            }
        }
        let z = c.centroid.filter(|z| rect.contains(*z)).unwrap_or_else(|| rect.center());
        let fz = self.s.eval(z)?;
        self.push(&rect, z, c.count, fz, c.max_log_abs, vec![FLAG_COUNT_MISMATCH.to_string()]);
        Ok(())
    }
}

/// Deterministic order: by real part, then imaginary part.
pub fn sort_zeros(z: &mut [Resonance]) {
    z.sort_by(|a, b| a.lambda.re.total_cmp(&b.lambda.re).then(a.lambda.im.total_cmp(&b.lambda.im)));
}

/// Locate all zeros of `f` in `region` by quadtree subdivision with
/// argument-principle counts, refining isolated zeros by Newton's method.
///
/// `sheet` and `method` only label the output.
pub fn find_zeros(f: &dyn DetFn, region: &Rect, sheet: Sheet, method: Method, opts: &SearchOptions) -> Result<SearchOutcome> {
    region.check_branch_margin(opts.branch_margin)?;
    let mut search = Search { s: Sampler::new(f), opts, sheet, method, zeros: Vec::new(), leaves: Vec::new() };
    let root = count_dilating(&search.s, region, opts)?;
    search.isolate(root, 0)?;
    let mut zeros = search.zeros;
    sort_zeros(&mut zeros);
    Ok(SearchOutcome {
        region: root.rect,
        total_count: root.count,
        zeros,
        leaves: search.leaves,
        evaluations: search.s.evals.load(Ordering::Relaxed),
    })
}

/// Real zeros of a function that is real (up to discretisation error) on an
/// interval: a sampled scan for sign changes of the real part and for local
/// minima of `|f|` (zeros of even order), each candidate confirmed and
/// measured by a small complex contour and refined by Newton's method.
pub fn find_real_zeros(
    f: &dyn DetFn,
    interval: [f64; 2],
    samples: usize,
    sheet: Sheet,
    method: Method,
    opts: &SearchOptions,
) -> Result<Vec<Resonance>> {
    let [a, b] = interval;
    if !(a < b) || samples < 3 {
        return Err(Error::ValidationError("real scan needs a < b and at least three samples".into()));
    }
    let s = Sampler::new(f);
    let dx = (b - a) / (samples - 1) as f64;
    let xs: Vec<f64> = (0..samples).map(|k| a + dx * k as f64).collect();
    let vals = xs.iter().map(|&x| s.eval(Complex64::new(x, 0.0))).collect::<Result<Vec<_>>>()?;
    let mut cands = Vec::new();
    for k in 0..samples {
        let here = vals[k].log_abs;
        let left = if k > 0 { vals[k - 1].log_abs } else { f64::INFINITY };
        let right = if k + 1 < samples { vals[k + 1].log_abs } else { f64::INFINITY };
        if here <= left && here < right {
            cands.push(xs[k]);
        }
        if k + 1 < samples {
            let (p, q) = (vals[k].to_complex().re, vals[k + 1].to_complex().re);
            if p * q < 0.0 {
                cands.push(xs[k] + dx * p / (p - q));
            }
        }
    }
    cands.sort_by(f64::total_cmp);
    cands.dedup_by(|x, y| (*x - *y).abs() < 0.5 * dx);
    let mut out: Vec<Resonance> = Vec::new();
    let search = Search { s, opts, sheet, method, zeros: Vec::new(), leaves: Vec::new() };
    for x in cands {
        let rect = Rect::square(Complex64::new(x, 0.0), 2.0 * dx);
        let c = match count_once(&search.s, &rect, opts, 2) {
            Ok(c) => c,
            Err(Error::BoundaryZero { .. }) | Err(Error::PhaseUnresolved(_)) => continue,
            Err(e) => return Err(e),
        };
        if c.count <= 0 {
            continue;
        }
        let start = c.centroid.filter(|z| rect.contains(*z)).unwrap_or(Complex64::new(x, 0.0));
        let (z, fz, converged) = match search.newton(&rect, start, c.count as f64, opts.newton_max_iter, c.max_log_abs)? {
            Some(r) => r,
            None => (start, search.s.eval(start)?, false),
        };
        if out.iter().any(|r| (r.lambda - z).norm() < 0.5 * dx) {
            continue;
        }
        let mut flags = Vec::new();
        if !converged {
            flags.push(FLAG_NONCONVERGED.to_string());
        }
        if c.count > 1 {
            flags.push(FLAG_DEGENERATE.to_string());
        }
        out.push(Resonance {
            lambda: z,
            multiplicity: c.count as usize,
            residual: fz.abs(),
            sheet,
            method,
            region: rect,
            flags,
        });
    }
    sort_zeros(&mut out);
    Ok(out)
}

/// `N(r)`: total multiplicity of the zeros with `|lambda| <= r`.
pub fn counting_function(zeros: &[Resonance], r: f64) -> usize {
    zeros.iter().filter(|z| z.lambda.norm() <= r).map(|z| z.multiplicity).sum()
}

/// Whether the union of `regions` (together with the conjugate-free upper
/// half plane the caller vouches for) covers the lower half of the disk
/// `|lambda| <= r`, tested on a sample lattice.
pub fn covers_lower_half_disk(regions: &[Rect], r: f64) -> bool {
    let n = 64;
    for i in 0..=n {
        for j in 1..=n / 2 {
            let z = Complex64::new(-r + 2.0 * r * i as f64 / n as f64, -r * j as f64 / (n / 2) as f64);
            if z.norm() > r || (z.re.abs() - 1.0).abs() < 1e-2 && z.im.abs() < 1e-2 {
                continue;
            }
            if !regions.iter().any(|q| q.contains(z)) {
                return false;
            }
        }
    }
    true
}

/// Jensen-type upper bound on the number of zeros in `|lambda| <= r`:
/// `(mean_theta log|f(2 r e^{i theta})| - log|f(0)|) / log 2`, with the
/// trapezoidal rule in `theta` starting from 64 samples and doubling until
/// the mean is stable to 1%.
pub fn jensen_bound(f: &dyn DetFn, r: f64) -> Result<f64> {
    jensen_bound_at(f, r, Complex64::new(0.0, 0.0))
}

/// [`jensen_bound`] with the circle centred at `base`.
pub fn jensen_bound_at(f: &dyn DetFn, r: f64, base: Complex64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::NonPositiveRadius(r));
    }
    let f0 = f.eval(base)?;
    if !(f0.log_abs > (1e-300f64).ln()) {
        return Err(Error::BasePointZero);
    }
    let sample = |n: usize, offset: usize, step: usize| -> Result<f64> {
        let mut acc = 0.0;
        let mut k = offset;
        while k < n {
            let th = 2.0 * PI * k as f64 / n as f64;
            acc += f.eval(base + Complex64::from_polar(2.0 * r, th))?.log_abs;
            k += step;
        }
        Ok(acc)
    };
    let mut n = 64;
    let mut sum = sample(n, 0, 1)?;
    let mut mean = sum / n as f64;
    for _ in 0..6 {
        // the odd points of the doubled rule
        sum += sample(2 * n, 1, 2)?;
        n *= 2;
        let next = sum / n as f64;
        let stable = (next - mean).abs() <= 0.01 * (next - f0.log_abs).abs().max(1e-12);
        mean = next;
        if stable {
            break;
        }
    }
    Ok(((mean - f0.log_abs) / 2f64.ln()).max(0.0))
}
