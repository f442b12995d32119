//! Hamiltonian side of the triple: the Legendre transform for jet-quadratic
//! Lagrangians, differentials of Hamiltonian sections into the affine phase
//! bundle, the beta morphism and its factorization through alpha, Hamiltonian
//! phase dynamics, and the symplectic pullback identity.
//!
//! Sign conventions are pinned so that the mechanics limit gives the
//! classical Hamilton equations and so that the Lagrangian and Hamiltonian
//! routes generate the same phase dynamics: h = p.v - l, xi_a = -dh/dy_a,
//! v_a_j = +dh/dp_a_j. See docs/conventions.md for the counterexample ruling
//! out a global-sign alternative.

use std::collections::BTreeMap;

use num::{BigRational, Zero};

use crate::charts::{
    canonical_forms, Chart, ChartError, ChartPoint, ChartSet, TwoForm,
};
use crate::expr::{diff, normalize, normalizes_to_zero, Expr, ExprError, Symbol};
use crate::lagrangian::{
    vertical_differential, AlphaPoint, DynamicsSystem, Equation, EquationClass, LagrangianError,
};
use crate::model::FieldModel;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HamiltonianError {
    #[error("{0}")]
    Chart(#[from] ChartError),
    #[error("{0}")]
    Expr(#[from] ExprError),
    #[error("{0}")]
    Lagrangian(#[from] LagrangianError),
    #[error("singular Lagrangian: the jet quadratic form is degenerate along {}", directions.join(", "))]
    SingularLagrangian { directions: Vec<String> },
    #[error("Lagrangian is not quadratic in the jet coordinates: {0}")]
    NonQuadratic(String),
    #[error("the model declares no sources")]
    MissingSources,
}

/// Where a Hamiltonian section came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    UserSupplied,
    LegendreDerived,
}

/// A Hamiltonian section of the affine dual, represented by its density
/// coefficient over the phase chart.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSection {
    pub h: Expr,
    pub provenance: Provenance,
}

/// Equation slots of the differential of a Hamiltonian section, as functions
/// on the phase chart: xi_a = -dh/dy_a and v_a_j = dh/dp_a_j.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionDifferential {
    pub xi: Vec<Expr>,
    pub v: Vec<Vec<Expr>>,
}

/// Legendre transform of a jet-quadratic Lagrangian: solves the momentum
/// definitions for the jets and returns h = sum p.v - l(v), normalized.
pub fn legendre_transform(model: &FieldModel) -> Result<HamiltonianSection, HamiltonianError> {
    let charts = model.charts();
    let l = model.lagrangian();
    let (m, n) = (charts.base_dim(), charts.fiber_dim());
    let k = n * m;
    let jets: Vec<Symbol> = (0..n)
        .flat_map(|a| (0..m).map(move |j| (a, j)))
        .map(|(a, j)| charts.jet_sym(a, j).clone())
        .collect();
    let momenta: Vec<Symbol> = (0..n)
        .flat_map(|a| (0..m).map(move |j| (a, j)))
        .map(|(a, j)| charts.momentum_sym(a, j).clone())
        .collect();
    let jet_set: std::collections::BTreeSet<Symbol> = jets.iter().cloned().collect();

    // quadratic coefficient matrix and linear part of dl/dv
    let grad: Vec<Expr> = jets
        .iter()
        .map(|v| normalize(&diff(l, v)).map_err(HamiltonianError::from))
        .collect::<Result<_, _>>()?;
    let mut q = vec![vec![Expr::zero(); k]; k];
    for i in 0..k {
        for lcol in 0..k {
            let entry = normalize(&diff(&grad[i], &jets[lcol]))?;
            if entry.free_symbols().iter().any(|s| jet_set.contains(s)) {
                return Err(HamiltonianError::NonQuadratic(format!(
                    "d2l/d{}d{} still depends on jet coordinates",
                    jets[i], jets[lcol]
                )));
            }
            q[i][lcol] = entry;
        }
    }
    let mut lin = vec![Expr::zero(); k];
    for i in 0..k {
        let mut acc = grad[i].clone();
        for lcol in 0..k {
            acc = acc - q[i][lcol].clone() * Expr::sym(&jets[lcol]);
        }
        let acc = normalize(&acc)?;
        if acc.free_symbols().iter().any(|s| jet_set.contains(s)) {
            return Err(HamiltonianError::NonQuadratic(format!(
                "dl/d{} is not affine in the jet coordinates",
                jets[i]
            )));
        }
        lin[i] = acc;
    }

    // solve q v = p - lin symbolically
    let rhs: Vec<Expr> = (0..k)
        .map(|i| normalize(&(Expr::sym(&momenta[i]) - lin[i].clone())))
        .collect::<Result<_, _>>()?;
    match solve_linear(&q, &rhs)? {
        Solve::Unique(v) => {
            let mut subst = BTreeMap::new();
            for (i, jet) in jets.iter().enumerate() {
                subst.insert(jet.clone(), v[i].clone());
            }
            let mut h = -l.substitute(&subst);
            for i in 0..k {
                h = h + Expr::sym(&momenta[i]) * v[i].clone();
            }
            Ok(HamiltonianSection {
                h: normalize(&h)?,
                provenance: Provenance::LegendreDerived,
            })
        }
        Solve::Singular(kernel) => {
            let directions = kernel
                .into_iter()
                .map(|w| {
                    let combo = Expr::sum(
                        w.iter()
                            .enumerate()
                            .map(|(i, c)| c.clone() * Expr::sym(&jets[i]))
                            .collect(),
                    );
                    normalize(&combo).map(|e| e.to_string())
                })
                .collect::<Result<Vec<_>, _>>()?;
            Err(HamiltonianError::SingularLagrangian { directions })
        }
    }
}

enum Solve {
    Unique(Vec<Expr>),
    Singular(Vec<Vec<Expr>>),
}

/// Gauss-Jordan elimination over the field of rational expressions. Returns
/// the unique solution or a kernel basis of the coefficient matrix.
fn solve_linear(mat: &[Vec<Expr>], rhs: &[Expr]) -> Result<Solve, ExprError> {
    let k = mat.len();
    let mut rows: Vec<Vec<Expr>> = (0..k)
        .map(|i| {
            let mut row = mat[i].clone();
            row.push(rhs[i].clone());
            row
        })
        .collect();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; k];
    let mut pivot_row = 0usize;
    for col in 0..k {
        let mut found = None;
        for r in pivot_row..k {
            if !normalizes_to_zero(&rows[r][col])? {
                found = Some(r);
                break;
            }
        }
        let Some(r) = found else { continue };
        rows.swap(pivot_row, r);
        let pivot = rows[pivot_row][col].clone();
        for c in col..=k {
            rows[pivot_row][c] = normalize(&(rows[pivot_row][c].clone() / pivot.clone()))?;
        }
        for r in 0..k {
            if r == pivot_row {
                continue;
            }
            let factor = rows[r][col].clone();
            if normalizes_to_zero(&factor)? {
                continue;
            }
            for c in col..=k {
                let v = rows[r][c].clone() - factor.clone() * rows[pivot_row][c].clone();
                rows[r][c] = normalize(&v)?;
            }
        }
        pivot_of_col[col] = Some(pivot_row);
        pivot_row += 1;
        if pivot_row == k {
            break;
        }
    }

    if pivot_of_col.iter().all(Option::is_some) {
        let mut out = vec![Expr::zero(); k];
        for (col, row) in pivot_of_col.iter().enumerate() {
            out[col] = rows[row.unwrap()][k].clone();
        }
        return Ok(Solve::Unique(out));
    }

    let mut kernel = Vec::new();
    for free in (0..k).filter(|c| pivot_of_col[*c].is_none()) {
        let mut w = vec![Expr::zero(); k];
        w[free] = Expr::one();
        for (col, row) in pivot_of_col.iter().enumerate() {
            if let Some(r) = row {
                w[col] = normalize(&-rows[*r][free].clone())?;
            }
        }
        kernel.push(w);
    }
    Ok(Solve::Singular(kernel))
}

/// Differential of a Hamiltonian section into the affine phase bundle.
pub fn section_differential(
    charts: &ChartSet,
    section: &HamiltonianSection,
) -> Result<SectionDifferential, HamiltonianError> {
    let h = &section.h;
    let mut xi = Vec::with_capacity(charts.fiber_dim());
    let mut v = Vec::with_capacity(charts.fiber_dim());
    for a in 0..charts.fiber_dim() {
        xi.push(normalize(&-diff(h, charts.fiber_sym(a)))?);
        let mut row = Vec::with_capacity(charts.base_dim());
        for j in 0..charts.base_dim() {
            row.push(normalize(&diff(h, charts.momentum_sym(a, j)))?);
        }
        v.push(row);
    }
    Ok(SectionDifferential { xi, v })
}

/// The beta morphism on a momentum-jet point: (x, y, p) pass through,
/// xi_a = sum_k dp_a_k_k, v_a_j = y_a_j. Returns a point of the affine
/// phase chart.
pub fn beta_map(charts: &ChartSet, u: &ChartPoint) -> Result<ChartPoint, ChartError> {
    if u.chart() != Chart::J1P {
        return Err(ChartError::ChartMismatch {
            expected: Chart::J1P,
            detail: format!("got a {} point", u.chart()),
        });
    }
    let mut vals = BTreeMap::new();
    for i in 0..charts.base_dim() {
        let s = charts.base_sym(i);
        vals.insert(s.clone(), u.get(s).clone());
    }
    for a in 0..charts.fiber_dim() {
        let s = charts.fiber_sym(a);
        vals.insert(s.clone(), u.get(s).clone());
        for j in 0..charts.base_dim() {
            let s = charts.momentum_sym(a, j);
            vals.insert(s.clone(), u.get(s).clone());
        }
        let mut trace = BigRational::zero();
        for kk in 0..charts.base_dim() {
            trace += u.get(charts.dmomentum_sym(a, kk, kk));
        }
        vals.insert(charts.xi_sym(a).clone(), trace);
        for j in 0..charts.base_dim() {
            vals.insert(
                charts.vel_sym(a, j).clone(),
                u.get(charts.jet_sym(a, j)).clone(),
            );
        }
    }
    ChartPoint::new(charts, Chart::PJdagE, vals)
}

/// The reduction map from alpha images into the affine phase chart: momenta
/// come from the momentum slot, xi from the Euler-Lagrange slot, and the
/// velocity slot copies the jets.
pub fn r_map(charts: &ChartSet, alpha: &AlphaPoint) -> Result<ChartPoint, ChartError> {
    let mut vals = BTreeMap::new();
    for (s, v) in &alpha.base {
        vals.insert(s.clone(), v.clone());
    }
    for a in 0..charts.fiber_dim() {
        for j in 0..charts.base_dim() {
            vals.insert(
                charts.momentum_sym(a, j).clone(),
                alpha.p_slot[a][j].clone(),
            );
            let jet = charts.jet_sym(a, j);
            let v = vals.remove(jet).ok_or_else(|| ChartError::ChartMismatch {
                expected: Chart::PJdagE,
                detail: format!("alpha image lacks jet coordinate {jet}"),
            })?;
            vals.insert(charts.vel_sym(a, j).clone(), v);
        }
        vals.insert(charts.xi_sym(a).clone(), alpha.e_slot[a].clone());
    }
    ChartPoint::new(charts, Chart::PJdagE, vals)
}

/// The beta morphism as a linear coordinate map: every affine-phase
/// coordinate as a combination of momentum-jet coordinates.
pub fn beta_linear_map(charts: &ChartSet) -> BTreeMap<Symbol, Vec<(Symbol, BigRational)>> {
    let one = BigRational::from_integer(1.into());
    let mut map = BTreeMap::new();
    for i in 0..charts.base_dim() {
        let s = charts.base_sym(i).clone();
        map.insert(s.clone(), vec![(s, one.clone())]);
    }
    for a in 0..charts.fiber_dim() {
        let s = charts.fiber_sym(a).clone();
        map.insert(s.clone(), vec![(s, one.clone())]);
        for j in 0..charts.base_dim() {
            let s = charts.momentum_sym(a, j).clone();
            map.insert(s.clone(), vec![(s, one.clone())]);
            map.insert(
                charts.vel_sym(a, j).clone(),
                vec![(charts.jet_sym(a, j).clone(), one.clone())],
            );
        }
        map.insert(
            charts.xi_sym(a).clone(),
            (0..charts.base_dim())
                .map(|kk| (charts.dmomentum_sym(a, kk, kk).clone(), one.clone()))
                .collect(),
        );
    }
    map
}

/// Outcome of a symbolic proof obligation.
#[derive(Debug, Clone, PartialEq)]
pub struct ProofReport {
    pub proved: bool,
    pub mismatches: Vec<String>,
}

/// Pull the affine-phase two-form back through a linear coordinate map and
/// compare with the negated momentum-jet two-form.
pub fn pullback_check_with_map(
    charts: &ChartSet,
    map: &BTreeMap<Symbol, Vec<(Symbol, BigRational)>>,
) -> ProofReport {
    let forms = canonical_forms(charts);
    let mut pulled = TwoForm::new(Chart::J1P);
    for ((s, t), c) in forms.omega_pjdag.upper_entries() {
        for (us, a) in &map[s] {
            for (vs, b) in &map[t] {
                pulled.add(us, vs, c * a * b);
            }
        }
    }
    let want = forms.omega_j1p.negated();
    if pulled == want {
        return ProofReport {
            proved: true,
            mismatches: Vec::new(),
        };
    }
    let mut mismatches = Vec::new();
    let mut keys: Vec<&(Symbol, Symbol)> = pulled.entries().keys().collect();
    keys.extend(want.entries().keys());
    keys.sort();
    keys.dedup();
    for (s, t) in keys.into_iter().filter(|(s, t)| s < t) {
        let got = pulled.component(s, t);
        let expect = want.component(s, t);
        if got != expect {
            mismatches.push(format!("component (d{s}, d{t}): got {got}, want {expect}"));
        }
    }
    ProofReport {
        proved: false,
        mismatches,
    }
}

/// The pullback identity for the canonical beta map.
pub fn pullback_symplectic_check(charts: &ChartSet) -> ProofReport {
    pullback_check_with_map(charts, &beta_linear_map(charts))
}

/// Hamiltonian phase dynamics on the momentum-jet chart: y_a_j = dh/dp_a_j
/// and sum_k dp_a_k_k = -dh/dy_a (+ source).
pub fn hamiltonian_dynamics(
    model: &FieldModel,
    section: &HamiltonianSection,
    with_sources: bool,
) -> Result<DynamicsSystem, HamiltonianError> {
    if with_sources && model.sources().is_none() {
        return Err(HamiltonianError::MissingSources);
    }
    let charts = model.charts();
    let sd = section_differential(charts, section)?;
    let mut equations = Vec::new();
    for a in 0..charts.fiber_dim() {
        for j in 0..charts.base_dim() {
            equations.push(
                Equation::try_new(
                    EquationClass::MomentumDef,
                    Expr::sym(charts.jet_sym(a, j)),
                    sd.v[a][j].clone(),
                )
                .map_err(HamiltonianError::from)?,
            );
        }
    }
    for a in 0..charts.fiber_dim() {
        let lhs = Expr::sum(
            (0..charts.base_dim())
                .map(|kk| Expr::sym(charts.dmomentum_sym(a, kk, kk)))
                .collect(),
        );
        let rhs = sd.xi[a].clone() + model.signed_source(a, with_sources);
        equations.push(
            Equation::try_new(EquationClass::DivergenceLaw, lhs, rhs)
                .map_err(HamiltonianError::from)?,
        );
    }
    Ok(DynamicsSystem {
        chart: Chart::J1P,
        equations,
    })
}

/// The Hamiltonian section a model provides: the declared one when present,
/// otherwise derived by the Legendre transform.
pub fn hamiltonian_section(model: &FieldModel) -> Result<HamiltonianSection, HamiltonianError> {
    if let Some(h) = model.hamiltonian() {
        return Ok(HamiltonianSection {
            h: h.clone(),
            provenance: Provenance::UserSupplied,
        });
    }
    legendre_transform(model)
}

/// Master consistency: after substituting the invertible momentum
/// definitions, the Lagrangian and Hamiltonian phase systems coincide
/// equation by equation, and the velocity slots of the derived section
/// invert the Legendre map.
pub fn master_consistency(model: &FieldModel) -> Result<ProofReport, HamiltonianError> {
    let charts = model.charts();
    let section = legendre_transform(model)?;
    let sd = section_differential(charts, &section)?;
    let dl = vertical_differential(model)?;

    let mut mismatches = Vec::new();

    // jets expressed through momenta
    let mut jets_by_momenta: BTreeMap<Symbol, Expr> = BTreeMap::new();
    for a in 0..charts.fiber_dim() {
        for j in 0..charts.base_dim() {
            jets_by_momenta.insert(charts.jet_sym(a, j).clone(), sd.v[a][j].clone());
        }
    }
    // momenta expressed through jets (the Legendre map)
    let mut momenta_by_jets: BTreeMap<Symbol, Expr> = BTreeMap::new();
    for a in 0..charts.fiber_dim() {
        for j in 0..charts.base_dim() {
            momenta_by_jets.insert(charts.momentum_sym(a, j).clone(), dl.p[a][j].clone());
        }
    }

    for a in 0..charts.fiber_dim() {
        for j in 0..charts.base_dim() {
            // momentum definition becomes the identity after substitution
            let e = dl.p[a][j].substitute(&jets_by_momenta)
                - Expr::sym(charts.momentum_sym(a, j));
            if !normalizes_to_zero(&e)? {
                mismatches.push(format!(
                    "momentum definition for p{}_{} does not invert",
                    a + 1,
                    j + 1
                ));
            }
            // velocity slots invert the Legendre map on jets
            let e = sd.v[a][j].substitute(&momenta_by_jets) - Expr::sym(charts.jet_sym(a, j));
            if !normalizes_to_zero(&e)? {
                mismatches.push(format!(
                    "v{}_{} composed with the Legendre map is not the identity",
                    a + 1,
                    j + 1
                ));
            }
        }
        // divergence laws agree: dl/dy_a restricted through the inverse
        // Legendre map equals -dh/dy_a
        let e = dl.e[a].substitute(&jets_by_momenta) - sd.xi[a].clone();
        if !normalizes_to_zero(&e)? {
            mismatches.push(format!(
                "divergence law for fiber {} disagrees between the two generators",
                a + 1
            ));
        }
    }

    Ok(ProofReport {
        proved: mismatches.is_empty(),
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin, parse_model_str};

    fn sym(name: &str) -> Expr {
        Expr::sym(&Symbol::new(name))
    }

    fn model_from(json: &str) -> FieldModel {
        parse_model_str(json).unwrap()
    }

    #[test]
    fn legendre_transform_of_electrostatics() {
        let model = builtin("electrostatics3d").unwrap();
        let section = legendre_transform(&model).unwrap();
        assert_eq!(section.provenance, Provenance::LegendreDerived);
        assert_eq!(section.h.to_string(), "p1_1^2/2 + p1_2^2/2 + p1_3^2/2");
    }

    #[test]
    fn legendre_transform_of_oscillator() {
        let model = builtin("oscillator1d").unwrap();
        let section = legendre_transform(&model).unwrap();
        assert_eq!(section.h.to_string(), "p1_1^2/2 + y1^2/2");
    }

    #[test]
    fn legendre_transform_rejects_singular_lagrangian() {
        let model = model_from(r#"{"base": ["x1"], "fibers": ["y1"], "lagrangian": "y1_1"}"#);
        let err = legendre_transform(&model).unwrap_err();
        match err {
            HamiltonianError::SingularLagrangian { directions } => {
                assert_eq!(directions, ["y1_1"]);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn legendre_transform_rejects_nonquadratic_lagrangian() {
        let model =
            model_from(r#"{"base": ["x1"], "fibers": ["y1"], "lagrangian": "y1_1^3"}"#);
        assert!(matches!(
            legendre_transform(&model),
            Err(HamiltonianError::NonQuadratic(_))
        ));
        let model =
            model_from(r#"{"base": ["x1"], "fibers": ["y1"], "lagrangian": "sin(y1_1)"}"#);
        assert!(matches!(
            legendre_transform(&model),
            Err(HamiltonianError::NonQuadratic(_))
        ));
    }

    #[test]
    fn legendre_transform_with_field_dependent_metric() {
        // l = (1 + y1^2) * y1_1^2 / 2: still quadratic in the jet, with an
        // invertible y-dependent coefficient
        let model = model_from(
            r#"{"base": ["x1"], "fibers": ["y1"], "lagrangian": "(1 + y1^2)*y1_1^2/2"}"#,
        );
        let section = legendre_transform(&model).unwrap();
        // h = p^2 / (2 (1 + y^2))
        let want = sym("p1_1").pow(2)
            / (Expr::int(2) * (Expr::one() + sym("y1").pow(2)));
        assert!(normalizes_to_zero(&(section.h.clone() - want)).unwrap());
    }

    #[test]
    fn section_differential_of_electrostatics() {
        let model = builtin("electrostatics3d").unwrap();
        let section = legendre_transform(&model).unwrap();
        let sd = section_differential(model.charts(), &section).unwrap();
        assert_eq!(sd.xi[0], Expr::zero());
        for (j, want) in ["p1_1", "p1_2", "p1_3"].iter().enumerate() {
            assert_eq!(sd.v[0][j], sym(want));
        }
    }

    #[test]
    fn section_differential_of_zero_hamiltonian() {
        let model = builtin("oscillator1d").unwrap();
        let section = HamiltonianSection {
            h: Expr::zero(),
            provenance: Provenance::UserSupplied,
        };
        let sd = section_differential(model.charts(), &section).unwrap();
        assert_eq!(sd.xi[0], Expr::zero());
        assert_eq!(sd.v[0][0], Expr::zero());
    }

    #[test]
    fn section_differential_of_oscillator() {
        let model = builtin("oscillator1d").unwrap();
        let section = legendre_transform(&model).unwrap();
        let sd = section_differential(model.charts(), &section).unwrap();
        assert_eq!(sd.xi[0].to_string(), "-y1");
        assert_eq!(sd.v[0][0], sym("p1_1"));
    }

    fn j1p_point(model: &FieldModel, assignments: &[(&str, i64)]) -> ChartPoint {
        let charts = model.charts();
        let mut vals = BTreeMap::new();
        for s in charts.symbols(Chart::J1P) {
            vals.insert(s.clone(), BigRational::zero());
        }
        for (name, v) in assignments {
            vals.insert(Symbol::new(name), BigRational::from_integer((*v).into()));
        }
        ChartPoint::new(charts, Chart::J1P, vals).unwrap()
    }

    #[test]
    fn beta_map_mechanics_example() {
        let model = builtin("oscillator1d").unwrap();
        let u = j1p_point(&model, &[("p1_1", 2), ("y1_1", 5), ("dp1_1_1", 7)]);
        let img = beta_map(model.charts(), &u).unwrap();
        assert_eq!(img.chart(), Chart::PJdagE);
        assert_eq!(img.get(&Symbol::new("p1_1")), &BigRational::from_integer(2.into()));
        assert_eq!(img.get(&Symbol::new("xi1")), &BigRational::from_integer(7.into()));
        assert_eq!(img.get(&Symbol::new("v1_1")), &BigRational::from_integer(5.into()));
    }

    #[test]
    fn beta_map_zero_fibers() {
        let model = builtin("oscillator1d").unwrap();
        let u = j1p_point(&model, &[]);
        let img = beta_map(model.charts(), &u).unwrap();
        assert!(img.get(&Symbol::new("xi1")).is_zero());
        assert!(img.get(&Symbol::new("v1_1")).is_zero());
    }

    #[test]
    fn beta_map_traces_momentum_derivatives() {
        let model = builtin("wave2d").unwrap();
        let u = j1p_point(&model, &[("dp1_1_1", 3), ("dp1_2_2", 4), ("y1_1", 6), ("y1_2", 8)]);
        let img = beta_map(model.charts(), &u).unwrap();
        assert_eq!(img.get(&Symbol::new("xi1")), &BigRational::from_integer(7.into()));
        assert_eq!(img.get(&Symbol::new("v1_1")), &BigRational::from_integer(6.into()));
        assert_eq!(img.get(&Symbol::new("v1_2")), &BigRational::from_integer(8.into()));
    }

    #[test]
    fn beta_factors_through_alpha() {
        use crate::lagrangian::alpha_map;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for name in ["oscillator1d", "wave2d", "electrostatics3d"] {
            let model = builtin(name).unwrap();
            let charts = model.charts();
            for _ in 0..20 {
                let mut vals = BTreeMap::new();
                for s in charts.symbols(Chart::J1P) {
                    vals.insert(
                        s.clone(),
                        BigRational::from_integer(rng.gen_range(-9i64..=9).into()),
                    );
                }
                let u = ChartPoint::new(charts, Chart::J1P, vals).unwrap();
                let direct = beta_map(charts, &u).unwrap();
                let through_r = r_map(charts, &alpha_map(charts, &u).unwrap()).unwrap();
                assert_eq!(direct, through_r);
            }
        }
    }

    #[test]
    fn hamiltonian_dynamics_of_electrostatics() {
        let model = builtin("electrostatics3d").unwrap();
        let section = legendre_transform(&model).unwrap();
        let sys = hamiltonian_dynamics(&model, &section, true).unwrap();
        let texts: Vec<String> = sys.equations.iter().map(|e| e.to_string()).collect();
        assert_eq!(
            texts,
            [
                "y1_1 = p1_1",
                "y1_2 = p1_2",
                "y1_3 = p1_3",
                "dp1_1_1 + dp1_2_2 + dp1_3_3 = rho"
            ]
        );
    }

    #[test]
    fn hamiltonian_dynamics_of_zero_hamiltonian() {
        let model = builtin("oscillator1d").unwrap();
        let section = HamiltonianSection {
            h: Expr::zero(),
            provenance: Provenance::UserSupplied,
        };
        let sys = hamiltonian_dynamics(&model, &section, false).unwrap();
        let texts: Vec<String> = sys.equations.iter().map(|e| e.to_string()).collect();
        assert_eq!(texts, ["y1_1 = 0", "dp1_1_1 = 0"]);
    }

    #[test]
    fn hamiltonian_dynamics_of_oscillator() {
        let model = builtin("oscillator1d").unwrap();
        let section = legendre_transform(&model).unwrap();
        let sys = hamiltonian_dynamics(&model, &section, false).unwrap();
        let texts: Vec<String> = sys.equations.iter().map(|e| e.to_string()).collect();
        assert_eq!(texts, ["y1_1 = p1_1", "dp1_1_1 = -y1"]);
    }

    #[test]
    fn pullback_identity_small_charts() {
        for (m, n) in [(1, 1), (2, 2), (3, 1)] {
            let base: Vec<String> = (1..=m).map(|i| format!("x{i}")).collect();
            let fibers: Vec<String> = (1..=n).map(|a| format!("y{a}")).collect();
            let charts = ChartSet::build(&base, &fibers).unwrap();
            let report = pullback_symplectic_check(&charts);
            assert!(report.proved, "pullback failed for m={m} n={n}: {:?}", report.mismatches);
        }
    }

    #[test]
    fn sign_flipped_beta_fails_pullback() {
        let model = builtin("oscillator1d").unwrap();
        let charts = model.charts();
        let mut map = beta_linear_map(charts);
        for a in 0..charts.fiber_dim() {
            let entry = map.get_mut(charts.xi_sym(a)).unwrap();
            for (_, c) in entry.iter_mut() {
                *c = -c.clone();
            }
        }
        let report = pullback_check_with_map(charts, &map);
        assert!(!report.proved);
        assert!(!report.mismatches.is_empty());
    }

    #[test]
    fn master_consistency_for_builtin_regular_models() {
        for name in ["oscillator1d", "wave2d", "electrostatics3d", "laplace2d"] {
            let model = builtin(name).unwrap();
            let report = master_consistency(&model).unwrap();
            assert!(report.proved, "{name}: {:?}", report.mismatches);
        }
    }
}
