//! Adaptive Gauss-Kronrod quadrature with user break points and epsilon
//! extrapolation, after the QUADPACK QAGP algorithm (Piessens et al.).
//!
//! Bisection alone stalls on the algebraic endpoint singularities produced by
//! the tangent substitution on heavy-tailed integrands (the panel width
//! bottoms out at machine precision while significant mass remains), so the
//! sequence of global estimates is accelerated with Wynn's epsilon algorithm
//! exactly as QUADPACK does.

const XGK21: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WG21: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const WGK21: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy)]
struct PanelEstimate {
    value: f64,
    err: f64,
    resabs: f64,
    resasc: f64,
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = err.abs();
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * resabs;
        if min_err > err {
            err = min_err;
        }
    }
    err
}

/// 21-point Gauss-Kronrod rule on [a, b].
fn qk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> PanelEstimate {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let f_center = f(center);
    let mut fv1 = [0.0f64; 10];
    let mut fv2 = [0.0f64; 10];

    let mut res_gauss = 0.0;
    let mut res_kronrod = f_center * WGK21[10];
    let mut res_abs = res_kronrod.abs();

    for j in 0..5 {
        let jtw = 2 * j + 1;
        let abscissa = half * XGK21[jtw];
        let fval1 = f(center - abscissa);
        let fval2 = f(center + abscissa);
        fv1[jtw] = fval1;
        fv2[jtw] = fval2;
        res_gauss += WG21[j] * (fval1 + fval2);
        res_kronrod += WGK21[jtw] * (fval1 + fval2);
        res_abs += WGK21[jtw] * (fval1.abs() + fval2.abs());
    }

    for j in 0..5 {
        let jtwm1 = 2 * j;
        let abscissa = half * XGK21[jtwm1];
        let fval1 = f(center - abscissa);
        let fval2 = f(center + abscissa);
        fv1[jtwm1] = fval1;
        fv2[jtwm1] = fval2;
        res_kronrod += WGK21[jtwm1] * (fval1 + fval2);
        res_abs += WGK21[jtwm1] * (fval1.abs() + fval2.abs());
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK21[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK21[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let err = (res_kronrod - res_gauss) * half;
    PanelEstimate {
        value: res_kronrod * half,
        err: rescale_error(err, res_abs * abs_half, res_asc * abs_half),
        resabs: res_abs * abs_half,
        resasc: res_asc * abs_half,
    }
}

/// Wynn epsilon table, following QUADPACK's QELG.
struct EpsilonTable {
    list: [f64; 52],
    n: usize,
    nres: usize,
    res3la: [f64; 3],
}

impl EpsilonTable {
    fn new() -> Self {
        Self {
            list: [0.0; 52],
            n: 0,
            nres: 0,
            res3la: [0.0; 3],
        }
    }

    fn append(&mut self, y: f64) {
        self.list[self.n] = y;
        self.n += 1;
    }

    /// Extrapolated limit of the appended sequence with an error estimate.
    fn extrapolate(&mut self) -> (f64, f64) {
        let n = self.n - 1;
        let current = self.list[n];
        let mut absolute = f64::MAX;
        let mut relative = 5.0 * f64::EPSILON * current.abs();

        if n < 2 {
            return (current, absolute.max(relative));
        }

        let mut result = current;
        let mut abserr = f64::MAX;
        let newelm = n / 2;
        let n_orig = n;
        let mut n_final = n;

        self.list[n + 2] = self.list[n];
        self.list[n] = f64::MAX;

        for i in 0..newelm {
            let mut res = self.list[n - 2 * i + 2];
            let e0 = self.list[n - 2 * i - 2];
            let e1 = self.list[n - 2 * i - 1];
            let e2 = res;

            let e1abs = e1.abs();
            let delta2 = e2 - e1;
            let err2 = delta2.abs();
            let tol2 = e2.abs().max(e1abs) * f64::EPSILON;
            let delta3 = e1 - e0;
            let err3 = delta3.abs();
            let tol3 = e1abs.max(e0.abs()) * f64::EPSILON;

            if err2 <= tol2 && err3 <= tol3 {
                // e0, e1, e2 agree to machine accuracy: converged.
                result = res;
                absolute = err2 + err3;
                relative = 5.0 * f64::EPSILON * res.abs();
                self.update_res3la(result);
                return (result, absolute.max(relative));
            }

            let e3 = self.list[n - 2 * i];
            self.list[n - 2 * i] = e1;
            let delta1 = e1 - e3;
            let err1 = delta1.abs();
            let tol1 = e1abs.max(e3.abs()) * f64::EPSILON;

            // Nearly-equal neighbours make the recursion unstable; truncate.
            if err1 <= tol1 || err2 <= tol2 || err3 <= tol3 {
                n_final = 2 * i;
                break;
            }

            let ss = 1.0 / delta1 + 1.0 / delta2 - 1.0 / delta3;
            if (ss * e1).abs() <= 1e-4 {
                n_final = 2 * i;
                break;
            }

            res = e1 + 1.0 / ss;
            self.list[n - 2 * i] = res;

            let error = err2 + (res - e2).abs() + err3;
            if error <= abserr {
                abserr = error;
                result = res;
            }
        }

        // Shift the table.
        let limexp = 52 - 2;
        if n_final == limexp {
            n_final = 2 * (limexp / 2);
        }
        if n_orig % 2 == 1 {
            for i in 0..=newelm {
                self.list[1 + i * 2] = self.list[i * 2 + 3];
            }
        } else {
            for i in 0..=newelm {
                self.list[i * 2] = self.list[i * 2 + 2];
            }
        }
        if n_orig != n_final {
            for i in 0..=n_final {
                self.list[i] = self.list[n_orig - n_final + i];
            }
        }
        self.n = n_final + 1;

        if self.nres < 3 {
            self.res3la[self.nres] = result;
            self.nres += 1;
            return (result, f64::MAX.max(5.0 * f64::EPSILON * result.abs()));
        }

        abserr = (result - self.res3la[2]).abs()
            + (result - self.res3la[1]).abs()
            + (result - self.res3la[0]).abs();
        self.update_res3la(result);
        (result, abserr.max(5.0 * f64::EPSILON * result.abs()))
    }

    fn update_res3la(&mut self, result: f64) {
        if self.nres < 3 {
            self.res3la[self.nres] = result;
        } else {
            self.res3la[0] = self.res3la[1];
            self.res3la[1] = self.res3la[2];
            self.res3la[2] = result;
        }
        self.nres += 1;
    }
}

/// Interval workspace with QUADPACK's ordering bookkeeping.
struct Workspace {
    limit: usize,
    size: usize,
    alist: Vec<f64>,
    blist: Vec<f64>,
    rlist: Vec<f64>,
    elist: Vec<f64>,
    order: Vec<usize>,
    level: Vec<usize>,
    nrmax: usize,
    current: usize,
    maximum_level: usize,
}

impl Workspace {
    fn new(limit: usize) -> Self {
        Self {
            limit,
            size: 0,
            alist: vec![0.0; limit],
            blist: vec![0.0; limit],
            rlist: vec![0.0; limit],
            elist: vec![0.0; limit],
            order: vec![0; limit],
            level: vec![0; limit],
            nrmax: 0,
            current: 0,
            maximum_level: 0,
        }
    }

    fn append(&mut self, a: f64, b: f64, value: f64, err: f64) {
        let i = self.size;
        self.alist[i] = a;
        self.blist[i] = b;
        self.rlist[i] = value;
        self.elist[i] = err;
        self.order[i] = i;
        self.level[i] = 0;
        self.size += 1;
    }

    fn sort_initial(&mut self) {
        let mut idx: Vec<usize> = (0..self.size).collect();
        idx.sort_by(|&i, &j| self.elist[j].partial_cmp(&self.elist[i]).unwrap());
        self.order[..self.size].copy_from_slice(&idx);
        self.nrmax = 0;
        self.current = self.order[0];
    }

    fn retrieve(&self) -> (f64, f64, f64, f64) {
        let i = self.current;
        (self.alist[i], self.blist[i], self.rlist[i], self.elist[i])
    }

    /// Replace the bisected interval and insert its sibling, keeping `order`
    /// sorted by decreasing error (QUADPACK's QPSRT).
    fn update(&mut self, p1: (f64, f64, f64, f64), p2: (f64, f64, f64, f64)) {
        let i_max = self.current;
        let i_new = self.size;
        let new_level = self.level[i_max] + 1;

        let ((a1, b1, r1, e1), (a2, b2, r2, e2)) = (p1, p2);
        if e2 > e1 {
            self.alist[i_max] = a2;
            self.rlist[i_max] = r2;
            self.elist[i_max] = e2;
            self.level[i_max] = new_level;
            self.alist[i_new] = a1;
            self.blist[i_new] = b1;
            self.rlist[i_new] = r1;
            self.elist[i_new] = e1;
            self.level[i_new] = new_level;
        } else {
            self.blist[i_max] = b1;
            self.rlist[i_max] = r1;
            self.elist[i_max] = e1;
            self.level[i_max] = new_level;
            self.alist[i_new] = a2;
            self.blist[i_new] = b2;
            self.rlist[i_new] = r2;
            self.elist[i_new] = e2;
            self.level[i_new] = new_level;
        }
        self.size += 1;
        if new_level > self.maximum_level {
            self.maximum_level = new_level;
        }
        self.qpsrt();
    }

    fn qpsrt(&mut self) {
        let last = self.size - 1;
        let limit = self.limit;

        if last < 2 {
            self.order[0] = 0;
            self.order[1] = 1;
            self.current = self.order[self.nrmax];
            return;
        }

        let mut i_nrmax = self.nrmax;
        let mut i_maxerr = self.order[i_nrmax];
        let errmax = self.elist[i_maxerr];

        while i_nrmax > 0 && errmax > self.elist[self.order[i_nrmax - 1]] {
            self.order[i_nrmax] = self.order[i_nrmax - 1];
            i_nrmax -= 1;
        }

        let top = if last < limit / 2 + 2 {
            last
        } else {
            limit - last + 1
        };

        let mut i = i_nrmax + 1;
        while i < top && errmax < self.elist[self.order[i]] {
            self.order[i - 1] = self.order[i];
            i += 1;
        }
        self.order[i - 1] = i_maxerr;

        let errmin = self.elist[last];
        let mut k = top as isize - 1;
        while k > i as isize - 2 && errmin >= self.elist[self.order[k as usize]] {
            self.order[k as usize + 1] = self.order[k as usize];
            k -= 1;
        }
        self.order[(k + 1) as usize] = last;

        i_maxerr = self.order[i_nrmax];
        self.current = i_maxerr;
        self.nrmax = i_nrmax;
    }

    fn large_interval(&self) -> bool {
        self.level[self.current] < self.maximum_level
    }

    fn increase_nrmax(&mut self) -> bool {
        let last = self.size - 1;
        let jupbnd = if last > 1 + self.limit / 2 {
            self.limit + 1 - last
        } else {
            last
        };
        for _ in self.nrmax..=jupbnd {
            let i_max = self.order[self.nrmax];
            self.current = i_max;
            if self.level[i_max] < self.maximum_level {
                return true;
            }
            self.nrmax += 1;
        }
        false
    }

    fn reset_nrmax(&mut self) {
        self.nrmax = 0;
        self.current = self.order[0];
    }

    fn sum_results(&self) -> f64 {
        self.rlist[..self.size].iter().sum()
    }
}

fn subinterval_too_small(a1: f64, a2: f64, b2: f64) -> bool {
    let e = f64::EPSILON;
    let u = f64::MIN_POSITIVE;
    let tmp = (1.0 + 100.0 * e) * (a2.abs() + 1000.0 * u);
    a1.abs() <= tmp && b2.abs() <= tmp
}

pub(crate) struct QuadOutcome {
    pub value: f64,
    pub abserr: f64,
}

/// Integrate `f` over the interval spanned by `pts` (sorted break points,
/// first and last entries are the integration bounds) to absolute tolerance
/// `epsabs`, with at most `limit` panel subdivisions.
pub(crate) fn qagp<F: Fn(f64) -> f64>(
    f: &F,
    pts: &[f64],
    epsabs: f64,
    limit: usize,
) -> QuadOutcome {
    assert!(pts.len() >= 2, "need at least the two endpoints");
    let nint = pts.len() - 1;
    let limit = limit.max(pts.len() + 2);

    let mut workspace = Workspace::new(limit + 2);
    let mut result0 = 0.0;
    let mut abserr0 = 0.0;
    let mut resabs0 = 0.0;
    let mut badly_behaved = vec![false; nint];

    for i in 0..nint {
        let p = qk21(f, pts[i], pts[i + 1]);
        result0 += p.value;
        abserr0 += p.err;
        resabs0 += p.resabs;
        workspace.append(pts[i], pts[i + 1], p.value, p.err);
        badly_behaved[i] = p.err == p.resasc && p.err != 0.0;
    }

    let mut errsum = 0.0;
    for i in 0..nint {
        if badly_behaved[i] {
            workspace.elist[i] = abserr0;
        }
        errsum += workspace.elist[i];
    }
    workspace.sort_initial();

    let tolerance = epsabs;
    if abserr0 <= tolerance || (abserr0 <= 100.0 * f64::EPSILON * resabs0) {
        return QuadOutcome {
            value: result0,
            abserr: abserr0,
        };
    }

    let mut table = EpsilonTable::new();
    table.append(result0);

    let mut area = result0;
    let mut res_ext = result0;
    let mut err_ext = f64::MAX;
    let mut error_over_large_intervals = errsum;
    let mut ertest = tolerance;
    let positive_integrand = result0.abs() >= (1.0 - 50.0 * f64::EPSILON) * resabs0;

    let mut extrapolate = false;
    let mut disallow_extrapolation = false;
    let mut roundoff_type1 = 0;
    let mut roundoff_type2 = 0;
    let mut roundoff_type3 = 0;
    let mut error_type = 0u8;
    let mut error_type2 = false;
    let mut correc = 0.0;
    let mut ktmin = 0;
    let mut iteration = nint - 1;

    loop {
        let (a_i, b_i, r_i, e_i) = workspace.retrieve();
        let current_level = workspace.level[workspace.current] + 1;

        let a1 = a_i;
        let b1 = 0.5 * (a_i + b_i);
        let a2 = b1;
        let b2 = b_i;
        iteration += 1;

        let p1 = qk21(f, a1, b1);
        let p2 = qk21(f, a2, b2);
        let area12 = p1.value + p2.value;
        let error12 = p1.err + p2.err;
        let last_e_i = e_i;

        errsum += error12 - e_i;
        area += area12 - r_i;

        if p1.resasc != p1.err && p2.resasc != p2.err {
            let delta = r_i - area12;
            if delta.abs() <= 1e-5 * area12.abs() && error12 >= 0.99 * e_i {
                if !extrapolate {
                    roundoff_type1 += 1;
                } else {
                    roundoff_type2 += 1;
                }
            }
            if iteration > 10 && error12 > e_i {
                roundoff_type3 += 1;
            }
        }

        if roundoff_type1 + roundoff_type2 >= 10 || roundoff_type3 >= 20 {
            error_type = 2;
        }
        if roundoff_type2 >= 5 {
            error_type2 = true;
        }
        if subinterval_too_small(a1, a2, b2) {
            error_type = 4;
        }

        workspace.update(
            (a1, b1, p1.value, p1.err),
            (a2, b2, p2.value, p2.err),
        );

        if errsum <= tolerance {
            return QuadOutcome {
                value: workspace.sum_results(),
                abserr: errsum,
            };
        }
        if error_type != 0 {
            break;
        }
        if iteration >= limit - 1 {
            error_type = 1;
            break;
        }
        if disallow_extrapolation {
            continue;
        }

        error_over_large_intervals -= last_e_i;
        if current_level < workspace.maximum_level {
            error_over_large_intervals += error12;
        }

        if !extrapolate {
            if workspace.large_interval() {
                continue;
            }
            extrapolate = true;
            workspace.nrmax = 1;
        }

        // While significant error remains on wide panels, keep bisecting
        // those before extrapolating.
        if !error_type2 && error_over_large_intervals > ertest && workspace.increase_nrmax() {
            continue;
        }

        table.append(area);
        if table.n >= 3 {
            let (reseps, abseps) = table.extrapolate();
            ktmin += 1;
            if ktmin > 5 && err_ext < 1e-3 * errsum {
                error_type = 5;
            }
            if abseps < err_ext {
                ktmin = 0;
                err_ext = abseps;
                res_ext = reseps;
                correc = error_over_large_intervals;
                ertest = epsabs;
                if err_ext <= ertest {
                    break;
                }
            }
            if table.n == 1 {
                disallow_extrapolation = true;
            }
            if error_type == 5 {
                break;
            }
        }

        workspace.reset_nrmax();
        extrapolate = false;
        error_over_large_intervals = errsum;
        if iteration >= limit {
            break;
        }
    }

    if err_ext == f64::MAX {
        return QuadOutcome {
            value: workspace.sum_results(),
            abserr: errsum,
        };
    }

    if error_type != 0 || error_type2 {
        let mut err_ext = err_ext;
        if error_type2 {
            err_ext += correc;
        }
        if res_ext != 0.0 && area != 0.0 {
            if err_ext / res_ext.abs() > errsum / area.abs() {
                return QuadOutcome {
                    value: workspace.sum_results(),
                    abserr: errsum,
                };
            }
        } else if err_ext > errsum {
            return QuadOutcome {
                value: workspace.sum_results(),
                abserr: errsum,
            };
        }
        let _ = positive_integrand;
        return QuadOutcome {
            value: res_ext,
            abserr: err_ext,
        };
    }

    QuadOutcome {
        value: res_ext,
        abserr: err_ext,
    }
}
