//! Batch verification suites behind the `nkcheck` CLI.
//!
//! Every suite is deterministic given the configuration: sampling uses
//! a seeded ChaCha8 generator and records are emitted in a fixed order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use num_complex::Complex64;

use crate::catalog::{
    chart_d1_to_d2, chart_family_d1, get_chart, integrate_a, transform_chart, Family,
    ImmersionChart, Profile,
};
use crate::frame::{
    classify, coefficients, cr_split, d1_integrability_defect, extract_angles, frame_at,
    orthonormality_residual, p_matrix_residual, pushforward_basis, transform_angles, AngleData,
    AngleLaw, FrameSample, CR_TOL,
};
use crate::nkcore::{
    apply_j, apply_p, euclid_inner, left_invariant_field, metric_g_unchecked as g, norm_g,
    numeric_nabla_j, numeric_nabla_p, tensor_g_unchecked, Isometry, TangentVector, FD_H1, SQRT3,
};
use crate::quat::Quaternion;
use crate::report::{CheckRecord, CheckReport, RunConfig};
use crate::sampling::{random_point, random_tangent, random_unit_quaternion};
use crate::Result;

/// Track the worst residual of a check across samples.
struct Agg {
    id: &'static str,
    anchor: &'static str,
    tol: f64,
    worst: f64,
    samples: usize,
}

impl Agg {
    fn new(id: &'static str, anchor: &'static str, tol: f64) -> Self {
        Self {
            id,
            anchor,
            tol,
            worst: 0.0,
            samples: 0,
        }
    }

    fn add(&mut self, residual: f64) {
        self.worst = self.worst.max(residual.abs());
        self.samples += 1;
    }

    fn record(&self) -> CheckRecord {
        CheckRecord::measured(
            self.id,
            self.anchor,
            self.worst,
            self.tol,
            format!("max over {} samples", self.samples),
        )
    }
}

/// Random-sample sweep over the ambient structure identities.
pub fn run_identity_suite(cfg: &RunConfig) -> Result<CheckReport> {
    cfg.validate()?;
    let ta = cfg.tol_algebraic;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut checks: Vec<Agg> = vec![
        Agg::new("j_squared", "J² = −Id", ta),
        Agg::new("metric_hermitian", "g(JZ,JW) = g(Z,W)", ta),
        Agg::new("qj_relation", "QJ(Z) = (Z − 2PZ)/√3", ta),
        Agg::new(
            "euclid_inner_split",
            "⟨Z,W⟩ = g(Z,W) + ½g(Z,PW)",
            ta,
        ),
        Agg::new("g_tensor_antisymmetry", "G(X,Y) + G(Y,X) = 0", ta),
        Agg::new("g_tensor_j_compat", "G(X,JY) + J G(X,Y) = 0", ta),
        Agg::new(
            "g_tensor_metric_cyclic",
            "g(G(X,Y),Z) + g(G(X,Z),Y) = 0",
            ta,
        ),
        Agg::new(
            "g_tensor_quartic_norm",
            "g(G(X,Y),G(Z,W)) closed quartic form",
            10.0 * ta,
        ),
        Agg::new("p_squared", "P² = Id", ta),
        Agg::new("pj_anticommute", "PJ = −JP", ta),
        Agg::new("p_isometry", "g(PZ,PW) = g(Z,W)", ta),
        Agg::new("p_symmetric", "g(PZ,W) = g(Z,PW)", ta),
        Agg::new("pg_compat", "P G(X,Y) + G(PX,PY) = 0", ta),
        Agg::new("curvature_metric_skew", "g(R(X,Y)Z,W) = −g(R(X,Y)W,Z)", ta),
        Agg::new("curvature_first_bianchi", "cyclic sum of R(X,Y)Z = 0", ta),
    ];

    for _ in 0..cfg.samples {
        let base = random_point(&mut rng);
        let x = random_tangent(&mut rng, base);
        let y = random_tangent(&mut rng, base);
        let z = random_tangent(&mut rng, base);
        let w = random_tangent(&mut rng, base);

        checks[0].add(norm_g(&(apply_j(&apply_j(&x)) + x)));
        checks[1].add(g(&apply_j(&x), &apply_j(&y)) - g(&x, &y));
        let qj = crate::nkcore::apply_q(&apply_j(&x));
        checks[2].add(norm_g(&(qj - (x - apply_p(&x).scale(2.0)).scale(1.0 / SQRT3))));
        checks[3].add(
            euclid_inner(&x, &y)? - g(&x, &y) - 0.5 * g(&x, &apply_p(&y)),
        );
        checks[4].add(norm_g(&(tensor_g_unchecked(&x, &y) + tensor_g_unchecked(&y, &x))));
        checks[5].add(norm_g(
            &(tensor_g_unchecked(&x, &apply_j(&y)) + apply_j(&tensor_g_unchecked(&x, &y))),
        ));
        checks[6].add(
            g(&tensor_g_unchecked(&x, &y), &z) + g(&tensor_g_unchecked(&x, &z), &y),
        );
        let (jx, jy) = (apply_j(&x), apply_j(&y));
        let quartic = (g(&x, &z) * g(&y, &w) - g(&x, &w) * g(&y, &z)
            - g(&jx, &z) * g(&jy, &w)
            + g(&jx, &w) * g(&jy, &z))
            / 3.0;
        checks[7].add(g(&tensor_g_unchecked(&x, &y), &tensor_g_unchecked(&z, &w)) - quartic);
        checks[8].add(norm_g(&(apply_p(&apply_p(&x)) - x)));
        checks[9].add(norm_g(&(apply_p(&apply_j(&x)) + apply_j(&apply_p(&x)))));
        checks[10].add(g(&apply_p(&x), &apply_p(&y)) - g(&x, &y));
        checks[11].add(g(&apply_p(&x), &y) - g(&x, &apply_p(&y)));
        checks[12].add(norm_g(
            &(apply_p(&tensor_g_unchecked(&x, &y))
                + tensor_g_unchecked(&apply_p(&x), &apply_p(&y))),
        ));
        let r = crate::nkcore::curvature_r(&x, &y, &z)?;
        checks[13].add(g(&r, &w) + g(&crate::nkcore::curvature_r(&x, &y, &w)?, &z));
        checks[14].add(norm_g(
            &(crate::nkcore::curvature_r(&x, &y, &z)?
                + crate::nkcore::curvature_r(&y, &z, &x)?
                + crate::nkcore::curvature_r(&z, &x, &y)?),
        ));
    }

    // Derivative-based identities use fewer, slower samples.
    let td = cfg.tol_derivative;
    let n_deriv = (cfg.samples / 10).max(10);
    let mut d_checks = [
        Agg::new("nearly_kahler_defining", "(∇̃_X J)X = 0 numerically", td),
        Agg::new("nabla_j_equals_g", "(∇̃_X J)Y = G(X,Y) numerically", td),
        Agg::new(
            "nabla_p_formula",
            "(∇̃_X P)Y = ½(JG(X,PY) + JPG(X,Y)) numerically",
            td,
        ),
    ];
    for _ in 0..n_deriv {
        let base = random_point(&mut rng);
        let x = random_tangent(&mut rng, base);
        let y = random_tangent(&mut rng, base);
        let gxx = numeric_nabla_j(&x, left_invariant_field(&x), FD_H1)?;
        d_checks[0].add(norm_g(&gxx));
        let gxy = numeric_nabla_j(&x, left_invariant_field(&y), FD_H1)?;
        d_checks[1].add(norm_g(&(gxy - tensor_g_unchecked(&x, &y))));
        let lhs = numeric_nabla_p(&x, left_invariant_field(&y), FD_H1)?;
        let rhs = (apply_j(&tensor_g_unchecked(&x, &apply_p(&y)))
            + apply_j(&apply_p(&tensor_g_unchecked(&x, &y))))
        .scale(0.5);
        d_checks[2].add(norm_g(&(lhs - rhs)));
    }

    let records = checks
        .iter()
        .map(Agg::record)
        .chain(d_checks.iter().map(Agg::record))
        .collect();
    Ok(CheckReport::new("identities", cfg, records))
}

fn grid_points(chart: &ImmersionChart, grid: usize) -> Vec<[f64; 3]> {
    let axis = |[lo, hi]: [f64; 2]| -> Vec<f64> {
        let m = 0.15 * (hi - lo);
        if grid == 1 {
            return vec![0.5 * (lo + hi)];
        }
        (0..grid)
            .map(|i| lo + m + (hi - lo - 2.0 * m) * i as f64 / (grid - 1) as f64)
            .collect()
    };
    let (xs, ys, zs) = (
        axis(chart.domain[0]),
        axis(chart.domain[1]),
        axis(chart.domain[2]),
    );
    let mut out = Vec::with_capacity(grid * grid * grid);
    for &x in &xs {
        for &y in &ys {
            for &z in &zs {
                out.push([x, y, z]);
            }
        }
    }
    out
}

/// The 15-entry multiplication table of G in the adapted frame; returns
/// the worst residual.
fn g_table_residual(fr: &FrameSample) -> f64 {
    let inv = 1.0 / SQRT3;
    let entries: [(usize, usize, [f64; 6]); 15] = [
        (0, 1, [0.0; 6]),
        (0, 2, [0.0, 0.0, 0.0, 0.0, inv, 0.0]),
        (0, 3, [0.0, 0.0, 0.0, 0.0, 0.0, inv]),
        (0, 4, [0.0, 0.0, -inv, 0.0, 0.0, 0.0]),
        (0, 5, [0.0, 0.0, 0.0, -inv, 0.0, 0.0]),
        (1, 2, [0.0, 0.0, 0.0, 0.0, 0.0, inv]),
        (1, 3, [0.0, 0.0, 0.0, 0.0, -inv, 0.0]),
        (1, 4, [0.0, 0.0, 0.0, inv, 0.0, 0.0]),
        (1, 5, [0.0, 0.0, -inv, 0.0, 0.0, 0.0]),
        (2, 3, [0.0; 6]),
        (2, 4, [inv, 0.0, 0.0, 0.0, 0.0, 0.0]),
        (2, 5, [0.0, inv, 0.0, 0.0, 0.0, 0.0]),
        (3, 4, [0.0, -inv, 0.0, 0.0, 0.0, 0.0]),
        (3, 5, [inv, 0.0, 0.0, 0.0, 0.0, 0.0]),
        (4, 5, [0.0; 6]),
    ];
    let mut worst = 0.0f64;
    for (i, j, coef) in entries {
        let gij = tensor_g_unchecked(&fr.e[i], &fr.e[j]);
        let mut expect = TangentVector::zero(fr.base);
        for (k, c) in coef.iter().enumerate() {
            expect = expect + fr.e[k].scale(*c);
        }
        worst = worst.max(norm_g(&(gij - expect)));
    }
    worst
}

struct RelationSet {
    names: Vec<&'static str>,
    residuals: Vec<f64>,
}

fn coefficient_relations(t: &crate::frame::CoefficientTable) -> RelationSet {
    let (ga, h, b) = (&t.gamma, &t.h, &t.b);
    let inv = 1.0 / SQRT3;
    let pairs: Vec<(&'static str, f64)> = vec![
        ("gamma11_3_eq_h12_1", ga[0][0][2] - h[0][1][0]),
        ("gamma12_3_eq_neg_h11_1", ga[0][1][2] + h[0][0][0]),
        ("gamma21_3_eq_h22_1", ga[1][0][2] - h[1][1][0]),
        ("gamma22_3_eq_neg_h12_1", ga[1][1][2] + h[0][1][0]),
        ("gamma31_3_eq_h23_1", ga[2][0][2] - h[1][2][0]),
        ("gamma32_3_eq_neg_h13_1", ga[2][1][2] + h[0][2][0]),
        ("h11_2_eq_neg_h12_3", h[0][0][1] + h[0][1][2]),
        ("h12_2_eq_h11_3", h[0][1][1] - h[0][0][2]),
        ("h13_3_eq_h23_2_plus", h[0][2][2] - h[1][2][1] - inv),
        ("h22_2_eq_h12_3", h[1][1][1] - h[0][1][2]),
        ("h22_3_eq_neg_h11_3", h[1][1][2] + h[0][0][2]),
        ("h23_3_eq_neg_h13_2", h[1][2][2] + h[0][2][1]),
        ("b11_2_eq_h13_3_plus", b[0][0][1] - h[0][2][2] - inv),
        ("b11_3_eq_neg_h13_2", b[0][0][2] + h[0][2][1]),
        ("b21_2_eq_neg_h13_2", b[1][0][1] + h[0][2][1]),
        ("b21_3_eq_neg_h13_3_plus", b[1][0][2] + h[0][2][2] - 2.0 * inv),
        ("b31_2_eq_h33_3", b[2][0][1] - h[2][2][2]),
        ("b31_3_eq_neg_h33_2", b[2][0][2] + h[2][2][1]),
        ("b12_3_eq_gamma_comb", b[0][1][2] - ga[0][0][1] + ga[2][1][2]),
        ("b22_3_eq_gamma_comb", b[1][1][2] - ga[1][0][1] - ga[2][0][2]),
        ("b32_3_eq_h_gamma_comb", b[2][1][2] - h[2][2][0] - ga[2][0][1]),
    ];
    RelationSet {
        names: pairs.iter().map(|(n, _)| *n).collect(),
        residuals: pairs.iter().map(|(_, r)| r.abs()).collect(),
    }
}

/// Grid sweep of a single chart: frame invariants, angles,
/// classification, coefficient relations, and integrability.
pub fn run_chart_suite(cfg: &RunConfig, chart_id: &str) -> Result<CheckReport> {
    cfg.validate()?;
    let chart = get_chart(chart_id)?;
    run_chart_suite_on(cfg, &chart)
}

/// Same sweep for an already-built chart (used for transformed charts).
pub fn run_chart_suite_on(cfg: &RunConfig, chart: &ImmersionChart) -> Result<CheckReport> {
    let points = grid_points(chart, cfg.grid);
    let meta = &chart.metadata;

    let mut on_surface = Agg::new("immersion.on_surface", "chart lands on S³×S³", 1e-10);
    let mut immersed = Agg::new(
        "immersion.rank",
        "pushforwards have Gram determinant above 1e-8",
        0.5,
    );
    let mut ortho = Agg::new("frame.orthonormality", "frame Gram matrix = Id", 1e-8);
    let mut gtable = Agg::new(
        "frame.g_table",
        "15-entry G multiplication table in the adapted frame",
        1e-7,
    );
    let mut pmat = Agg::new(
        "frame.p_matrix",
        "6×6 matrix of P matches the (θ, a) model row by row",
        1e-6,
    );
    let mut a_norm = Agg::new("angles.a_norm", "a₁²+a₂²+a₃²+a₄² = 1", 1e-8);
    let mut omega_id = Agg::new(
        "angles.omega_identity",
        "ω₁,ω₂,ω₃ match their quadratic expressions in a",
        1e-6,
    );
    let mut theta_exp = Agg::new(
        "angles.theta_expected",
        "contact angle matches the class value",
        1e-6,
    );
    let mut a34_exp = Agg::new(
        "angles.a34_expected",
        "(a₃,a₄) matches the family branch value (cos t, sin t)",
        1e-5,
    );
    let mut omega_exp = Agg::new(
        "angles.omega_expected",
        "(ω₁,ω₂,ω₃) matches the family branch value",
        1e-5,
    );
    let mut class_match = Agg::new(
        "class.match",
        "computed class equals the chart's expected class",
        0.5,
    );
    let mut negative_check = Agg::new(
        "class.no_d1_to_d1_with_d2_to_d3",
        "with θ ≈ 0 the projection of PE₃ onto span(E₅,E₆) stays below 0.9",
        0.9,
    );
    let mut coeff_sym = Agg::new(
        "coeff.symmetries",
        "Γ and b antisymmetric in the last two indices; h symmetric",
        1e-6,
    );
    let mut relation_aggs: Option<Vec<Agg>> = None;
    let mut trace_defect = Agg::new(
        "defect.trace_consistency",
        "g([E₁,E₂],E₃) = −(h₁₁¹ + h₂₂¹)",
        1e-4,
    );
    let mut defect_exp = Agg::new(
        "defect.expected",
        "integrability defect magnitude matches the class",
        1e-4,
    );
    let mut spot_h113 = Agg::new("coeff.h11_3_spot", "h₁₁³ = −1/√3", 1e-5);
    let mut spot_h232 = Agg::new("coeff.h23_2_spot", "h₂₃² = −1/(2√3)", 1e-5);

    for &params in &points {
        let pt = chart.eval(params[0], params[1], params[2]);
        on_surface.add((pt.p().norm() - 1.0).abs().max((pt.q().norm() - 1.0).abs()));
        let basis = pushforward_basis(chart, params)?;
        let mut gram = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                gram[i][j] = g(&basis[i], &basis[j]);
            }
        }
        let det = gram[0][0] * (gram[1][1] * gram[2][2] - gram[1][2] * gram[2][1])
            - gram[0][1] * (gram[1][0] * gram[2][2] - gram[1][2] * gram[2][0])
            + gram[0][2] * (gram[1][0] * gram[2][1] - gram[1][1] * gram[2][0]);
        immersed.add(if det > 1e-8 { 0.0 } else { 1.0 });

        let split = cr_split(&basis, CR_TOL)?;
        let fr = crate::frame::build_frame(&split)?;
        ortho.add(orthonormality_residual(&fr));
        gtable.add(g_table_residual(&fr));
        let ang = extract_angles(&fr)?;
        pmat.add(p_matrix_residual(&fr, &ang));
        a_norm.add(ang.a.iter().map(|x| x * x).sum::<f64>() - 1.0);
        let om = [
            ang.a[2] * ang.a[2] - ang.a[3] * ang.a[3] + ang.a[1] * ang.a[1] - ang.a[0] * ang.a[0],
            2.0 * (ang.a[2] * ang.a[3] - ang.a[0] * ang.a[1]),
            2.0 * (ang.a[0] * ang.a[2] + ang.a[1] * ang.a[3]),
        ];
        for k in 0..3 {
            omega_id.add(ang.omega[k] - om[k]);
        }
        if let Some(theta) = meta.expected_theta {
            theta_exp.add(ang.theta - theta);
        }
        if let Some((a3, a4)) = meta.expected_a34 {
            a34_exp.add((ang.a[2] - a3).abs().max((ang.a[3] - a4).abs()));
        }
        if let Some(omega) = meta.expected_omega {
            for k in 0..3 {
                omega_exp.add(ang.omega[k] - omega[k]);
            }
        }
        let class = classify(&ang, 1e-3);
        class_match.add(if class == meta.expected_class { 0.0 } else { 1.0 });
        if ang.theta < 1e-3 {
            let p3 = apply_p(&fr.e[2]);
            let proj =
                (g(&p3, &fr.e[4]).powi(2) + g(&p3, &fr.e[5]).powi(2)).sqrt();
            negative_check.add(proj);
        }

        let table = coefficients(chart, params)?;
        let mut sym = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    sym = sym
                        .max((table.gamma[i][j][k] + table.gamma[i][k][j]).abs())
                        .max((table.b[i][j][k] + table.b[i][k][j]).abs())
                        .max((table.h[i][j][k] - table.h[j][i][k]).abs());
                }
            }
        }
        coeff_sym.add(sym);
        let rel = coefficient_relations(&table);
        let aggs = relation_aggs.get_or_insert_with(|| {
            rel.names
                .iter()
                .map(|n| Agg::new(n, "frame coefficient relation", 1e-5))
                .collect()
        });
        for (agg, r) in aggs.iter_mut().zip(rel.residuals.iter()) {
            agg.add(*r);
        }

        let defect = d1_integrability_defect(chart, params)?;
        trace_defect.add(defect + table.h[0][0][0] + table.h[1][1][0]);
        if let Some(mag) = meta.expected_defect_abs {
            defect_exp.add(defect.abs() - mag);
        }
        if chart.name == "thm52" {
            spot_h113.add(table.h[0][0][2] + 1.0 / SQRT3);
            spot_h232.add(table.h[1][2][1] + 1.0 / (2.0 * SQRT3));
        }
    }

    let mut records = vec![
        on_surface.record(),
        immersed.record(),
        ortho.record(),
        gtable.record(),
        pmat.record(),
        a_norm.record(),
        omega_id.record(),
    ];
    if meta.expected_theta.is_some() {
        records.push(theta_exp.record());
    }
    if meta.expected_a34.is_some() {
        records.push(a34_exp.record());
    }
    if meta.expected_omega.is_some() {
        records.push(omega_exp.record());
    }
    records.push(class_match.record());
    if negative_check.samples > 0 {
        records.push(negative_check.record());
    }
    records.push(coeff_sym.record());
    if let Some(aggs) = &relation_aggs {
        records.extend(aggs.iter().map(Agg::record));
    }
    records.push(trace_defect.record());
    if meta.expected_defect_abs.is_some() {
        records.push(defect_exp.record());
    }
    if chart.name == "thm52" {
        records.push(spot_h113.record());
        records.push(spot_h232.record());
    }
    Ok(CheckReport::new(&format!("chart.{}", chart.name), cfg, records))
}

/// Verify the A(t) profile integration: closed form, norm drift, and
/// the quaternionic system satisfied by (A, A·i).
pub fn run_ode_suite(cfg: &RunConfig) -> Result<CheckReport> {
    cfg.validate()?;
    let a0 = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let mut records = Vec::new();

    // f ≡ 0 has the closed-form solution (cos(√3t/2), sin(√3t/2)).
    let path = integrate_a(Profile::Zero, a0, (0.0, 2.0 * std::f64::consts::PI), 1e-3)?;
    let mut worst = 0.0f64;
    for k in 0..path.a1.len() {
        let t = path.t0 + k as f64 * path.step;
        worst = worst
            .max((path.a1[k] - Complex64::new((SQRT3 / 2.0 * t).cos(), 0.0)).norm())
            .max((path.a2[k] - Complex64::new((SQRT3 / 2.0 * t).sin(), 0.0)).norm());
    }
    records.push(CheckRecord::measured(
        "closed_form_constant_profile",
        "f ≡ 0 integrates to (cos(√3t/2), sin(√3t/2))",
        worst,
        1e-9,
        "grid over [0, 2π], step 1e-3".into(),
    ));
    records.push(CheckRecord::measured(
        "norm_drift",
        "unit norm preserved to RK4 accuracy before renormalization",
        path.max_drift,
        1e-8,
        "per-step drift over [0, 2π]".into(),
    ));

    for profile in [Profile::Zero, Profile::Linear, Profile::Sine] {
        let path = integrate_a(profile, a0, (0.0, 2.0), 1e-3)?;
        // Unit-norm first integral at every stored node.
        let mut norm_resid = 0.0f64;
        for k in 0..path.a1.len() {
            norm_resid = norm_resid
                .max(((path.a1[k].norm_sqr() + path.a2[k].norm_sqr()).sqrt() - 1.0).abs());
        }
        // (A, B) = (A, A·i) satisfies the quaternionic pre-reduction
        // system; check both equations by central differences.
        let h = 1e-4;
        let c = SQRT3 / 4.0;
        let mut sys_resid = 0.0f64;
        for &t in &[0.3, 0.9, 1.6] {
            let a = |t: f64| path.a_quat(t).unwrap();
            let b = |t: f64| a(t) * Quaternion::I;
            let da = (a(t + h) - a(t - h)).scale(0.5 / h);
            let db = (b(t + h) - b(t - h)).scale(0.5 / h);
            let f = profile.eval(t);
            let e_m = Quaternion::new(f.cos(), -f.sin(), 0.0, 0.0);
            let rhs_a = (a(t) * Quaternion::J - b(t) * Quaternion::K) * e_m;
            let rhs_b = (a(t) * Quaternion::K + b(t) * Quaternion::J) * e_m;
            sys_resid = sys_resid
                .max((da - rhs_a.scale(c)).norm())
                .max((db + rhs_b.scale(c)).norm());
        }
        let pid = profile.id();
        records.push(CheckRecord::measured(
            &format!("unit_norm.{pid}"),
            "|a₁|² + |a₂|² = 1 along the path",
            norm_resid,
            1e-9,
            "grid over [0, 2], step 1e-3".into(),
        ));
        records.push(CheckRecord::measured(
            &format!("second_coefficient.{pid}"),
            "(A, A·i) satisfies the quaternionic coefficient system",
            sys_resid,
            1e-8,
            "central differences at three interior times".into(),
        ));
    }

    // a₀ = (0, 1) forces a₁′(0) = −√3/2 whenever f(0) = 0.
    let a0_swap = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    let path = integrate_a(Profile::Sine, a0_swap, (0.0, 0.1), 1e-5)?;
    let h = 1e-5;
    let slope = (path.at(h)?.0 - path.at(0.0)?.0) / h;
    records.push(CheckRecord::measured(
        "initial_slope",
        "a₁′(0) = −√3/2 for a₀ = (0, 1)",
        (slope - Complex64::new(-SQRT3 / 2.0, 0.0)).norm(),
        1e-4,
        "forward difference at t = 0".into(),
    ));

    Ok(CheckReport::new("ode", cfg, records))
}

/// Rebuild the adapted frame on the image of an isometry the way the
/// transformation laws assume: Ê₁ and Ê₃ are the pushforwards of E₁
/// and E₃, with Ê₂ = JÊ₁ and the rest rebuilt from the structure.
///
/// The pushed frame is not re-gauged, so the contact angle is
/// recomputed gauge-invariantly: the projection norm of PÊ₁ onto
/// span(Ê₃…Ê₆) is rotation-invariant, while the cosine part is taken
/// as the maximum of g(PX,X) over unit X in span(Ê₁,Ê₂).
fn pushed_angles(iso: Isometry, fr: &FrameSample) -> Result<AngleData> {
    let e1 = iso.apply_tangent(&fr.e[0]);
    let e2 = apply_j(&e1);
    let e3 = iso.apply_tangent(&fr.e[2]);
    let e4 = apply_j(&e3);
    let e5 = tensor_g_unchecked(&e1, &e3).scale(SQRT3);
    let e6 = -apply_j(&e5);
    let pushed = FrameSample {
        base: e1.base,
        e: [e1, e2, e3, e4, e5, e6],
        gauge: fr.gauge,
    };
    let mut ang = extract_angles(&pushed)?;
    let p1 = apply_p(&pushed.e[0]);
    let p2 = apply_p(&pushed.e[1]);
    let half_diff = 0.5 * (g(&p1, &pushed.e[0]) - g(&p2, &pushed.e[1]));
    let mean = 0.5 * (g(&p1, &pushed.e[0]) + g(&p2, &pushed.e[1]));
    let cos_t = (mean + half_diff.hypot(g(&p1, &pushed.e[1]))).clamp(-1.0, 1.0);
    let sin_t = (0..4)
        .map(|k| g(&p1, &pushed.e[k + 2]).powi(2))
        .sum::<f64>()
        .sqrt();
    ang.theta = sin_t.atan2(cos_t).clamp(0.0, std::f64::consts::FRAC_PI_2);
    Ok(ang)
}

/// Ten seeded chart/position combinations for the angle transformation
/// laws.
fn seeded_charts(cfg: &RunConfig) -> Result<Vec<ImmersionChart>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x1e0_a4c5);
    let a0 = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let mut charts = vec![
        get_chart("thm42.f1")?,
        get_chart("thm42.f2")?,
        get_chart("thm42.f3")?,
        get_chart("thm52")?,
        get_chart("cor.f1")?,
        get_chart("cor.f2")?,
        get_chart("cor.f3")?,
        chart_family_d1(Family::F1, Profile::Linear, a0)?,
        chart_family_d1(Family::F1, Profile::Sine, a0)?,
        chart_d1_to_d2(
            random_unit_quaternion(&mut rng).scale(0.5),
            random_unit_quaternion(&mut rng).scale(0.5),
        )?,
    ];
    // Put each chart in generic position with a random two-point
    // rotation; these commute with J and P, so all angle data is
    // unchanged while the quaternion coordinates are scrambled.
    for chart in &mut charts {
        let iso = Isometry::fabc(
            random_unit_quaternion(&mut rng),
            random_unit_quaternion(&mut rng),
            random_unit_quaternion(&mut rng),
        )?;
        *chart = transform_chart(chart, iso);
    }
    Ok(charts)
}

fn interior_point<R: Rng>(chart: &ImmersionChart, rng: &mut R) -> [f64; 3] {
    let mut x = [0.0f64; 3];
    for (xi, [lo, hi]) in x.iter_mut().zip(chart.domain.iter()) {
        let m = 0.2 * (hi - lo);
        *xi = rng.gen_range(lo + m..hi - m);
    }
    x
}

/// Compare the printed angle transformation laws for the discrete
/// isometries against direct recomputation on the transformed frame.
pub fn run_isometry_suite(cfg: &RunConfig) -> Result<CheckReport> {
    cfg.validate()?;
    let charts = seeded_charts(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let mut records = Vec::new();

    let mut swap_theta = Agg::new(
        "factor_swap.theta",
        "contact angle invariant under the factor swap",
        1e-5,
    );
    let mut swap_a = Agg::new(
        "factor_swap.a_law",
        "(a₁,a₂,a₃,a₄) ↦ (a₁,−a₂,−a₃,a₄) under the factor swap",
        1e-5,
    );
    let mut twist_theta = Agg::new(
        "inverse_twist.theta",
        "contact angle invariant under the inverse twist",
        1e-5,
    );
    let mut twist_a = Agg::new(
        "inverse_twist.a_law_orthogonal",
        "(a₁,a₂) and (a₃,a₄) reflect under the corrected inverse-twist law",
        1e-5,
    );
    let mut twist_omega = Agg::new(
        "inverse_twist.omega_law",
        "ω transformation law under the inverse twist",
        1e-5,
    );
    let mut twist_gap = Agg::new(
        "inverse_twist.printed_a_gap",
        "printed inverse-twist a-law vs direct recomputation; the \
         printed blocks disagree with the transformed frame and the \
         gap is recorded here",
        2.0,
    );

    for chart in &charts {
        let params = interior_point(chart, &mut rng);
        let fr = frame_at(chart, params)?;
        let ang = extract_angles(&fr)?;

        let direct = pushed_angles(Isometry::F1, &fr)?;
        let law = transform_angles(&ang, AngleLaw::FactorSwap);
        swap_theta.add(direct.theta - law.theta);
        // At θ ≈ 0 the individual aᵢ are gauge representatives only;
        // compare the gauge-invariant ω instead.
        if ang.theta > 1e-3 {
            for k in 0..4 {
                swap_a.add(direct.a[k] - law.a[k]);
            }
        } else {
            for k in 0..3 {
                swap_a.add(direct.omega[k] - law.omega[k]);
            }
        }

        let direct = pushed_angles(Isometry::F2, &fr)?;
        let law = transform_angles(&ang, AngleLaw::InverseTwistOrthogonal);
        let printed = transform_angles(&ang, AngleLaw::InverseTwist);
        twist_theta.add(direct.theta - law.theta);
        if ang.theta > 1e-3 {
            for k in 0..4 {
                twist_a.add(direct.a[k] - law.a[k]);
                twist_gap.add(direct.a[k] - printed.a[k]);
            }
        } else {
            for k in 0..3 {
                twist_omega.add(direct.omega[k] - law.omega[k]);
            }
        }
    }

    records.push(swap_theta.record());
    records.push(swap_a.record());
    records.push(twist_theta.record());
    records.push(twist_a.record());
    records.push(twist_omega.record());
    records.push(twist_gap.record());
    Ok(CheckReport::new("isometries", cfg, records))
}

/// Run every suite and merge the reports.
pub fn run_all(cfg: &RunConfig) -> Result<CheckReport> {
    cfg.validate()?;
    let mut parts = vec![run_identity_suite(cfg)?];
    for id in &cfg.charts {
        parts.push(run_chart_suite(cfg, id)?);
    }
    parts.push(run_ode_suite(cfg)?);
    parts.push(run_isometry_suite(cfg)?);
    Ok(CheckReport::merged("all", cfg, parts))
}
