//! Lagrangian side of the triple: the vertical differential of the density,
//! the alpha morphism pairing momentum jets with configuration covectors,
//! phase dynamics with and without sources, total derivatives, the split of
//! a covector into Euler-Lagrange and momentum parts, and the Legendre map.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigRational, Zero};

use crate::charts::{Chart, ChartError, ChartPoint, ChartSet};
use crate::expr::{diff, normalize, Expr, ExprError, Symbol};
use crate::model::FieldModel;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LagrangianError {
    #[error("{0}")]
    Chart(#[from] ChartError),
    #[error("{0}")]
    Expr(#[from] ExprError),
    #[error("expression already lives on the second-jet chart (found `{0}`)")]
    OrderOverflow(Symbol),
    #[error("expression mentions `{0}`, which is not a jet-chart coordinate or parameter")]
    ForeignSymbol(Symbol),
    #[error("the model declares no sources")]
    MissingSources,
}

/// Classification of a derived equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquationClass {
    MomentumDef,
    DivergenceLaw,
    EulerLagrange,
    Constraint,
}

impl EquationClass {
    pub fn as_str(self) -> &'static str {
        match self {
            EquationClass::MomentumDef => "momentum_def",
            EquationClass::DivergenceLaw => "divergence_law",
            EquationClass::EulerLagrange => "euler_lagrange",
            EquationClass::Constraint => "constraint",
        }
    }
}

impl fmt::Display for EquationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One symbolic equation, stored with both sides in canonical form.
#[derive(Debug, Clone, PartialEq)]
pub struct Equation {
    pub class: EquationClass,
    pub lhs: Expr,
    pub rhs: Expr,
}

impl Equation {
    /// Build an equation with both sides normalized.
    pub fn try_new(class: EquationClass, lhs: Expr, rhs: Expr) -> Result<Equation, ExprError> {
        Ok(Equation {
            class,
            lhs: normalize(&lhs)?,
            rhs: normalize(&rhs)?,
        })
    }

    /// lhs - rhs in canonical form.
    pub fn residual(&self) -> Result<Expr, ExprError> {
        normalize(&(&self.lhs - &self.rhs))
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

/// A classified set of equations over one named chart.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsSystem {
    pub chart: Chart,
    pub equations: Vec<Equation>,
}

impl DynamicsSystem {
    pub fn equations_of(&self, class: EquationClass) -> impl Iterator<Item = &Equation> {
        self.equations.iter().filter(move |e| e.class == class)
    }
}

/// A covector on the first-jet space with values in top forms, stored by its
/// dy- and d(jet)-coefficients relative to the coordinate volume.
#[derive(Debug, Clone, PartialEq)]
pub struct VerticalCovector {
    /// dy^a coefficients (the Euler-Lagrange slots).
    pub e: Vec<Expr>,
    /// dy^a_j coefficients (the momentum slots), fiber-major.
    pub p: Vec<Vec<Expr>>,
}

/// Vertical differential of the Lagrangian density:
/// e_a = dl/dy_a, p_a_j = dl/dy_a_j, normalized.
pub fn vertical_differential(model: &FieldModel) -> Result<VerticalCovector, LagrangianError> {
    let charts = model.charts();
    let l = model.lagrangian();
    let mut e = Vec::with_capacity(charts.fiber_dim());
    let mut p = Vec::with_capacity(charts.fiber_dim());
    for a in 0..charts.fiber_dim() {
        e.push(normalize(&diff(l, charts.fiber_sym(a)))?);
        let mut row = Vec::with_capacity(charts.base_dim());
        for j in 0..charts.base_dim() {
            row.push(normalize(&diff(l, charts.jet_sym(a, j)))?);
        }
        p.push(row);
    }
    Ok(VerticalCovector { e, p })
}

/// Image of a momentum-jet point under the alpha morphism: base coordinates
/// pass through, the dy-slot receives the trace of the momentum derivatives,
/// and the dy_j-slot receives the momenta.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaPoint {
    /// Pass-through (x, y, y_j) coordinates.
    pub base: BTreeMap<Symbol, BigRational>,
    /// dy^a coefficient: sum_l dp_a_l_l.
    pub e_slot: Vec<BigRational>,
    /// dy^a_j coefficient: p_a_j.
    pub p_slot: Vec<Vec<BigRational>>,
}

pub fn alpha_map(charts: &ChartSet, u: &ChartPoint) -> Result<AlphaPoint, ChartError> {
    if u.chart() != Chart::J1P {
        return Err(ChartError::ChartMismatch {
            expected: Chart::J1P,
            detail: format!("got a {} point", u.chart()),
        });
    }
    let mut base = BTreeMap::new();
    for i in 0..charts.base_dim() {
        let s = charts.base_sym(i);
        base.insert(s.clone(), u.get(s).clone());
    }
    for a in 0..charts.fiber_dim() {
        let s = charts.fiber_sym(a);
        base.insert(s.clone(), u.get(s).clone());
        for j in 0..charts.base_dim() {
            let s = charts.jet_sym(a, j);
            base.insert(s.clone(), u.get(s).clone());
        }
    }
    let mut e_slot = Vec::with_capacity(charts.fiber_dim());
    let mut p_slot = Vec::with_capacity(charts.fiber_dim());
    for a in 0..charts.fiber_dim() {
        let mut trace = BigRational::zero();
        for l in 0..charts.base_dim() {
            trace += u.get(charts.dmomentum_sym(a, l, l));
        }
        e_slot.push(trace);
        p_slot.push(
            (0..charts.base_dim())
                .map(|j| u.get(charts.momentum_sym(a, j)).clone())
                .collect(),
        );
    }
    Ok(AlphaPoint {
        base,
        e_slot,
        p_slot,
    })
}

/// The alpha morphism as a symbolic coordinate map on the momentum-jet chart.
#[derive(Debug, Clone)]
pub struct AlphaSymbolic {
    pub e_slot: Vec<Expr>,
    pub p_slot: Vec<Vec<Expr>>,
}

pub fn alpha_symbolic(charts: &ChartSet) -> AlphaSymbolic {
    let mut e_slot = Vec::with_capacity(charts.fiber_dim());
    let mut p_slot = Vec::with_capacity(charts.fiber_dim());
    for a in 0..charts.fiber_dim() {
        e_slot.push(Expr::sum(
            (0..charts.base_dim())
                .map(|l| Expr::sym(charts.dmomentum_sym(a, l, l)))
                .collect(),
        ));
        p_slot.push(
            (0..charts.base_dim())
                .map(|j| Expr::sym(charts.momentum_sym(a, j)))
                .collect(),
        );
    }
    AlphaSymbolic { e_slot, p_slot }
}

/// Pairing of an alpha image with a vertical vector on the first-jet space:
/// sum_a E_a dy_a + sum_{a,j} P_a_j dy_a_j, with shared (x, y, y_j)
/// agreement required.
pub fn covector_pairing(
    charts: &ChartSet,
    alpha: &AlphaPoint,
    w: &ChartPoint,
) -> Result<BigRational, ChartError> {
    if w.chart() != Chart::VJ1E {
        return Err(ChartError::ChartMismatch {
            expected: Chart::VJ1E,
            detail: format!("got a {} point", w.chart()),
        });
    }
    for (s, v) in &alpha.base {
        if w.get(s) != v {
            return Err(ChartError::BaseMismatch(s.clone()));
        }
    }
    let mut acc = BigRational::zero();
    for a in 0..charts.fiber_dim() {
        acc += &alpha.e_slot[a] * w.get(charts.dfiber_sym(a));
        for j in 0..charts.base_dim() {
            acc += &alpha.p_slot[a][j] * w.get(charts.djet_sym(a, j));
        }
    }
    Ok(acc)
}

/// Phase dynamics on the momentum-jet chart: the momentum definitions
/// p_a_j = dl/dy_a_j followed by the divergence laws
/// sum_j dp_a_j_j = dl/dy_a (+ source). Off-trace dp_a_j_k coordinates stay
/// free: the dynamics is a differential inclusion, and no regularity of the
/// Lagrangian is required.
pub fn phase_dynamics(
    model: &FieldModel,
    with_sources: bool,
) -> Result<DynamicsSystem, LagrangianError> {
    if with_sources && model.sources().is_none() {
        return Err(LagrangianError::MissingSources);
    }
    let charts = model.charts();
    let dl = vertical_differential(model)?;
    let mut equations = Vec::new();
    for a in 0..charts.fiber_dim() {
        for j in 0..charts.base_dim() {
            equations.push(Equation::try_new(
                EquationClass::MomentumDef,
                Expr::sym(charts.momentum_sym(a, j)),
                dl.p[a][j].clone(),
            )?);
        }
    }
    for a in 0..charts.fiber_dim() {
        let lhs = Expr::sum(
            (0..charts.base_dim())
                .map(|j| Expr::sym(charts.dmomentum_sym(a, j, j)))
                .collect(),
        );
        let rhs = dl.e[a].clone() + model.signed_source(a, with_sources);
        equations.push(Equation::try_new(EquationClass::DivergenceLaw, lhs, rhs)?);
    }
    Ok(DynamicsSystem {
        chart: Chart::J1P,
        equations,
    })
}

fn check_jet_chart_scope(
    charts: &ChartSet,
    e: &Expr,
    allow_vertical: bool,
) -> Result<(), LagrangianError> {
    let j2e = charts.symbol_set(Chart::J2E);
    let j1e = charts.symbol_set(Chart::J1E);
    let j1p = charts.symbol_set(Chart::J1P);
    let vj1e = charts.symbol_set(Chart::VJ1E);
    for s in e.free_symbols() {
        if j1e.contains(&s) {
            continue;
        }
        if j2e.contains(&s) {
            return Err(LagrangianError::OrderOverflow(s));
        }
        if allow_vertical && vj1e.contains(&s) {
            continue;
        }
        if j1p.contains(&s) || vj1e.contains(&s) || charts.symbol_set(Chart::PJdagE).contains(&s) {
            return Err(LagrangianError::ForeignSymbol(s));
        }
        // anything else is a parameter, constant under total derivatives
    }
    Ok(())
}

/// Total derivative along base direction j (0-based) of an expression on the
/// first-jet chart (or lower): D_j e = de/dx_j + sum_a y_a_j de/dy_a
/// + sum_{a,i} y_a_{(i,j)} de/dy_a_i, with second jets in canonical index
/// order. Parameters are constants.
pub fn total_derivative(
    charts: &ChartSet,
    e: &Expr,
    j: usize,
) -> Result<Expr, LagrangianError> {
    check_jet_chart_scope(charts, e, false)?;
    total_derivative_unchecked(charts, e, j, false)
}

/// Total derivative extended to the vertical coordinates: additionally maps
/// dy_a to dy_a_j. Used for checking the variational identity.
pub fn total_derivative_vertical(
    charts: &ChartSet,
    e: &Expr,
    j: usize,
) -> Result<Expr, LagrangianError> {
    check_jet_chart_scope(charts, e, true)?;
    total_derivative_unchecked(charts, e, j, true)
}

fn total_derivative_unchecked(
    charts: &ChartSet,
    e: &Expr,
    j: usize,
    vertical: bool,
) -> Result<Expr, LagrangianError> {
    let mut terms = vec![diff(e, charts.base_sym(j))];
    for a in 0..charts.fiber_dim() {
        terms.push(Expr::sym(charts.jet_sym(a, j)) * diff(e, charts.fiber_sym(a)));
        for i in 0..charts.base_dim() {
            terms.push(Expr::sym(charts.jet2_sym(a, i, j)) * diff(e, charts.jet_sym(a, i)));
        }
        if vertical {
            terms.push(Expr::sym(charts.djet_sym(a, j)) * diff(e, charts.dfiber_sym(a)));
        }
    }
    Ok(normalize(&Expr::sum(terms))?)
}

/// The two vertical parts of a covector on the first-jet space: the momentum
/// part is the dy_j-block unchanged; the Euler-Lagrange part subtracts the
/// total divergence of the momentum block and lives on the second-jet chart.
#[derive(Debug, Clone, PartialEq)]
pub struct EpSplit {
    pub e_part: Vec<Expr>,
    pub p_part: Vec<Vec<Expr>>,
}

pub fn ep_split(charts: &ChartSet, mu: &VerticalCovector) -> Result<EpSplit, LagrangianError> {
    let mut e_part = Vec::with_capacity(mu.e.len());
    for a in 0..mu.e.len() {
        let mut divergence = Vec::with_capacity(charts.base_dim());
        for j in 0..charts.base_dim() {
            divergence.push(total_derivative(charts, &mu.p[a][j], j)?);
        }
        e_part.push(normalize(&(mu.e[a].clone() - Expr::sum(divergence)))?);
    }
    Ok(EpSplit {
        e_part,
        p_part: mu.p.clone(),
    })
}

/// Euler-Lagrange system on the second-jet chart, arranged divergence-first:
/// sum_j D_j(dl/dy_a_j) = dl/dy_a (+ source).
pub fn euler_lagrange(
    model: &FieldModel,
    with_sources: bool,
) -> Result<DynamicsSystem, LagrangianError> {
    if with_sources && model.sources().is_none() {
        return Err(LagrangianError::MissingSources);
    }
    let charts = model.charts();
    let dl = vertical_differential(model)?;
    let split = ep_split(charts, &dl)?;
    let mut equations = Vec::new();
    for a in 0..charts.fiber_dim() {
        // dl.e[a] - e_part[a] is exactly the momentum divergence
        let lhs = normalize(&(dl.e[a].clone() - split.e_part[a].clone()))?;
        let rhs = dl.e[a].clone() + model.signed_source(a, with_sources);
        equations.push(Equation::try_new(EquationClass::EulerLagrange, lhs, rhs)?);
    }
    Ok(DynamicsSystem {
        chart: Chart::J2E,
        equations,
    })
}

/// The Legendre map: momenta as functions on the first-jet chart,
/// p_a_j = dl/dy_a_j.
pub fn legendre_map(model: &FieldModel) -> Result<Vec<Vec<Expr>>, LagrangianError> {
    Ok(vertical_differential(model)?.p)
}
