//! Adapted coordinate charts for every space of the triple, plus the
//! coordinate-level canonical maps: the flip between vertical jets and jets
//! of verticals, the jet/vertical evaluation pairing, and the canonical one-
//! and two-form component tables.
//!
//! All densities and form values are scalar coefficients relative to the
//! coordinate volume `eta = dx1 ^ ... ^ dxm` and the contracted basis
//! `eta_i`; the base is oriented, so nothing is lost.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::BigRational;

use crate::expr::{Expr, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChartError {
    #[error("invalid dimension: base and fiber dimensions must be at least 1")]
    InvalidDimension,
    #[error("invalid coordinate name `{0}`")]
    InvalidName(String),
    #[error("name collision on `{0}`: user-chosen names clash with generated names")]
    NameCollision(String),
    #[error("chart mismatch: expected the {expected} chart, {detail}")]
    ChartMismatch { expected: Chart, detail: String },
    #[error("base mismatch: shared coordinate `{0}` disagrees between the two points")]
    BaseMismatch(Symbol),
}

/// The ten chart roles of the triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Chart {
    E,
    J1E,
    J2E,
    VE,
    VJ1E,
    J1VE,
    P,
    J1P,
    JdagE,
    PJdagE,
}

impl Chart {
    pub fn as_str(self) -> &'static str {
        match self {
            Chart::E => "E",
            Chart::J1E => "J1E",
            Chart::J2E => "J2E",
            Chart::VE => "VE",
            Chart::VJ1E => "VJ1E",
            Chart::J1VE => "J1VE",
            Chart::P => "P",
            Chart::J1P => "J1P",
            Chart::JdagE => "JdagE",
            Chart::PJdagE => "PJdagE",
        }
    }

    pub const ALL: [Chart; 10] = [
        Chart::E,
        Chart::J1E,
        Chart::J2E,
        Chart::VE,
        Chart::VJ1E,
        Chart::J1VE,
        Chart::P,
        Chart::J1P,
        Chart::JdagE,
        Chart::PJdagE,
    ];
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ordered coordinate symbols for one field model. Orderings are
/// deterministic in (m, n, names): base, then fibers, then generated
/// symbols fiber-major with ascending base indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartSet {
    m: usize,
    n: usize,
    base: Vec<Symbol>,
    fiber: Vec<Symbol>,
    jet: Vec<Vec<Symbol>>,
    jet2: Vec<Vec<Symbol>>, // [a][pair index for j <= k]
    dfiber: Vec<Symbol>,
    djet: Vec<Vec<Symbol>>,
    momentum: Vec<Vec<Symbol>>,
    dmomentum: Vec<Vec<Vec<Symbol>>>, // [a][j][k]
    affine: Symbol,                   // the fiber coordinate of JdagE
    xi: Vec<Symbol>,
    vel: Vec<Vec<Symbol>>,
    lists: BTreeMap<Chart, Vec<Symbol>>,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl ChartSet {
    /// Build all ten charts for the given base and fiber coordinate names.
    pub fn build(base_names: &[String], fiber_names: &[String]) -> Result<ChartSet, ChartError> {
        let m = base_names.len();
        let n = fiber_names.len();
        if m == 0 || n == 0 {
            return Err(ChartError::InvalidDimension);
        }
        for name in base_names.iter().chain(fiber_names.iter()) {
            if !valid_name(name) || crate::expr::FuncTag::from_name(name).is_some() {
                return Err(ChartError::InvalidName(name.clone()));
            }
        }

        let base: Vec<Symbol> = base_names.iter().map(Symbol::new).collect();
        let fiber: Vec<Symbol> = fiber_names.iter().map(Symbol::new).collect();
        let jet: Vec<Vec<Symbol>> = fiber_names
            .iter()
            .map(|y| (1..=m).map(|j| Symbol::new(format!("{y}_{j}"))).collect())
            .collect();
        let jet2: Vec<Vec<Symbol>> = fiber_names
            .iter()
            .map(|y| {
                let mut row = Vec::new();
                for j in 1..=m {
                    for k in j..=m {
                        row.push(Symbol::new(format!("{y}_{j}_{k}")));
                    }
                }
                row
            })
            .collect();
        let dfiber: Vec<Symbol> = fiber_names
            .iter()
            .map(|y| Symbol::new(format!("d{y}")))
            .collect();
        let djet: Vec<Vec<Symbol>> = fiber_names
            .iter()
            .map(|y| (1..=m).map(|j| Symbol::new(format!("d{y}_{j}"))).collect())
            .collect();
        let momentum: Vec<Vec<Symbol>> = (1..=n)
            .map(|a| (1..=m).map(|j| Symbol::new(format!("p{a}_{j}"))).collect())
            .collect();
        let dmomentum: Vec<Vec<Vec<Symbol>>> = (1..=n)
            .map(|a| {
                (1..=m)
                    .map(|j| {
                        (1..=m)
                            .map(|k| Symbol::new(format!("dp{a}_{j}_{k}")))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let affine = Symbol::new("r");
        let xi: Vec<Symbol> = (1..=n).map(|a| Symbol::new(format!("xi{a}"))).collect();
        let vel: Vec<Vec<Symbol>> = (1..=n)
            .map(|a| (1..=m).map(|j| Symbol::new(format!("v{a}_{j}"))).collect())
            .collect();

        let mut cs = ChartSet {
            m,
            n,
            base,
            fiber,
            jet,
            jet2,
            dfiber,
            djet,
            momentum,
            dmomentum,
            affine,
            xi,
            vel,
            lists: BTreeMap::new(),
        };
        cs.populate_lists();

        // each role slot gets its own name: any repetition in the flattened
        // role list is a collision (typically a user name shadowing a
        // generated jet/momentum name)
        let mut seen: BTreeSet<&Symbol> = BTreeSet::new();
        for s in cs.role_symbols() {
            if !seen.insert(s) {
                return Err(ChartError::NameCollision(s.name().to_string()));
            }
        }
        Ok(cs)
    }

    fn populate_lists(&mut self) {
        let e: Vec<Symbol> = self.base.iter().chain(self.fiber.iter()).cloned().collect();
        let jets_flat: Vec<Symbol> = self.jet.iter().flatten().cloned().collect();
        let jet2_flat: Vec<Symbol> = self.jet2.iter().flatten().cloned().collect();
        let dfib: Vec<Symbol> = self.dfiber.clone();
        let djet_flat: Vec<Symbol> = self.djet.iter().flatten().cloned().collect();
        let p_flat: Vec<Symbol> = self.momentum.iter().flatten().cloned().collect();
        let dp_flat: Vec<Symbol> = self
            .dmomentum
            .iter()
            .flat_map(|a| a.iter().flatten())
            .cloned()
            .collect();
        let xi: Vec<Symbol> = self.xi.clone();
        let v_flat: Vec<Symbol> = self.vel.iter().flatten().cloned().collect();

        let j1e: Vec<Symbol> = e.iter().chain(jets_flat.iter()).cloned().collect();
        let j2e: Vec<Symbol> = j1e.iter().chain(jet2_flat.iter()).cloned().collect();
        let ve: Vec<Symbol> = e.iter().chain(dfib.iter()).cloned().collect();
        let vj1e: Vec<Symbol> = j1e
            .iter()
            .chain(dfib.iter())
            .chain(djet_flat.iter())
            .cloned()
            .collect();
        let j1ve: Vec<Symbol> = e
            .iter()
            .chain(dfib.iter())
            .chain(jets_flat.iter())
            .chain(djet_flat.iter())
            .cloned()
            .collect();
        let p: Vec<Symbol> = e.iter().chain(p_flat.iter()).cloned().collect();
        let j1p: Vec<Symbol> = p
            .iter()
            .chain(jets_flat.iter())
            .chain(dp_flat.iter())
            .cloned()
            .collect();
        let jdage: Vec<Symbol> = p.iter().cloned().chain([self.affine.clone()]).collect();
        let pjdage: Vec<Symbol> = p
            .iter()
            .chain(xi.iter())
            .chain(v_flat.iter())
            .cloned()
            .collect();

        self.lists.insert(Chart::E, e);
        self.lists.insert(Chart::J1E, j1e);
        self.lists.insert(Chart::J2E, j2e);
        self.lists.insert(Chart::VE, ve);
        self.lists.insert(Chart::VJ1E, vj1e);
        self.lists.insert(Chart::J1VE, j1ve);
        self.lists.insert(Chart::P, p);
        self.lists.insert(Chart::J1P, j1p);
        self.lists.insert(Chart::JdagE, jdage);
        self.lists.insert(Chart::PJdagE, pjdage);
    }

    /// Every role slot once, flattened.
    fn role_symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.base
            .iter()
            .chain(self.fiber.iter())
            .chain(self.jet.iter().flatten())
            .chain(self.jet2.iter().flatten())
            .chain(self.dfiber.iter())
            .chain(self.djet.iter().flatten())
            .chain(self.momentum.iter().flatten())
            .chain(self.dmomentum.iter().flat_map(|a| a.iter().flatten()))
            .chain(std::iter::once(&self.affine))
            .chain(self.xi.iter())
            .chain(self.vel.iter().flatten())
    }

    pub fn base_dim(&self) -> usize {
        self.m
    }

    pub fn fiber_dim(&self) -> usize {
        self.n
    }

    /// Ordered symbol list of one chart.
    pub fn symbols(&self, chart: Chart) -> &[Symbol] {
        &self.lists[&chart]
    }

    /// Base coordinate x_{i+1} (0-based index).
    pub fn base_sym(&self, i: usize) -> &Symbol {
        &self.base[i]
    }

    /// Fiber coordinate y_{a+1}.
    pub fn fiber_sym(&self, a: usize) -> &Symbol {
        &self.fiber[a]
    }

    /// First-jet coordinate of fiber a along base direction j (0-based).
    pub fn jet_sym(&self, a: usize, j: usize) -> &Symbol {
        &self.jet[a][j]
    }

    /// Second-jet coordinate; the index pair is reordered to j <= k.
    pub fn jet2_sym(&self, a: usize, j: usize, k: usize) -> &Symbol {
        let (j, k) = if j <= k { (j, k) } else { (k, j) };
        // pairs (j,k), j <= k, enumerated j-major
        let idx = j * self.m - j * (j + 1) / 2 + k;
        &self.jet2[a][idx]
    }

    pub fn dfiber_sym(&self, a: usize) -> &Symbol {
        &self.dfiber[a]
    }

    pub fn djet_sym(&self, a: usize, j: usize) -> &Symbol {
        &self.djet[a][j]
    }

    pub fn momentum_sym(&self, a: usize, j: usize) -> &Symbol {
        &self.momentum[a][j]
    }

    /// dp{a}_{j}_{k}: the x_k-derivative slot of momentum p{a}_{j}.
    pub fn dmomentum_sym(&self, a: usize, j: usize, k: usize) -> &Symbol {
        &self.dmomentum[a][j][k]
    }

    /// The affine fiber coordinate of the affine-dual chart.
    pub fn affine_sym(&self) -> &Symbol {
        &self.affine
    }

    pub fn xi_sym(&self, a: usize) -> &Symbol {
        &self.xi[a]
    }

    pub fn vel_sym(&self, a: usize, j: usize) -> &Symbol {
        &self.vel[a][j]
    }

    /// Symbol set of a chart for parser scoping.
    pub fn symbol_set(&self, chart: Chart) -> BTreeSet<Symbol> {
        self.symbols(chart).iter().cloned().collect()
    }
}

/// A numeric point of one chart: an assignment covering exactly the chart's
/// symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartPoint {
    chart: Chart,
    values: BTreeMap<Symbol, BigRational>,
}

impl ChartPoint {
    pub fn new(
        charts: &ChartSet,
        chart: Chart,
        values: BTreeMap<Symbol, BigRational>,
    ) -> Result<ChartPoint, ChartError> {
        let expected: BTreeSet<&Symbol> = charts.symbols(chart).iter().collect();
        let got: BTreeSet<&Symbol> = values.keys().collect();
        if expected != got {
            let missing: Vec<String> = expected
                .difference(&got)
                .map(|s| s.name().to_string())
                .collect();
            let extra: Vec<String> = got
                .difference(&expected)
                .map(|s| s.name().to_string())
                .collect();
            return Err(ChartError::ChartMismatch {
                expected: chart,
                detail: format!("missing {missing:?}, extraneous {extra:?}"),
            });
        }
        Ok(ChartPoint { chart, values })
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn get(&self, s: &Symbol) -> &BigRational {
        &self.values[s]
    }

    pub fn values(&self) -> &BTreeMap<Symbol, BigRational> {
        &self.values
    }
}

/// Transport a vertical vector on the first-jet space to the first jet of a
/// vertical field: values are unchanged, the coordinate roles are re-labeled
/// between the two chart orderings. The map is a bijection and an involution
/// at the level of component multisets.
pub fn kappa_flip(charts: &ChartSet, point: &ChartPoint) -> Result<ChartPoint, ChartError> {
    if point.chart() != Chart::VJ1E {
        return Err(ChartError::ChartMismatch {
            expected: Chart::VJ1E,
            detail: format!("got a {} point", point.chart()),
        });
    }
    ChartPoint::new(charts, Chart::J1VE, point.values.clone())
}

/// Inverse transport, J1VE back to VJ1E.
pub fn kappa_flip_inv(charts: &ChartSet, point: &ChartPoint) -> Result<ChartPoint, ChartError> {
    if point.chart() != Chart::J1VE {
        return Err(ChartError::ChartMismatch {
            expected: Chart::J1VE,
            detail: format!("got a {} point", point.chart()),
        });
    }
    ChartPoint::new(charts, Chart::VJ1E, point.values.clone())
}

/// Evaluation between a first jet of a momentum section and a first jet of a
/// vertical field, as the coefficient of the volume form:
/// sum_a sum_l dp_a_l_l * dy_a + sum_a sum_j p_a_j * dy_a_j.
pub fn jet_pairing(
    charts: &ChartSet,
    u: &ChartPoint,
    w: &ChartPoint,
) -> Result<BigRational, ChartError> {
    if u.chart() != Chart::J1P {
        return Err(ChartError::ChartMismatch {
            expected: Chart::J1P,
            detail: format!("got a {} point for the jet argument", u.chart()),
        });
    }
    if w.chart() != Chart::J1VE {
        return Err(ChartError::ChartMismatch {
            expected: Chart::J1VE,
            detail: format!("got a {} point for the vertical argument", w.chart()),
        });
    }
    // shared (x, y, y_j) coordinates must agree
    for i in 0..charts.base_dim() {
        let s = charts.base_sym(i);
        if u.get(s) != w.get(s) {
            return Err(ChartError::BaseMismatch(s.clone()));
        }
    }
    for a in 0..charts.fiber_dim() {
        let s = charts.fiber_sym(a);
        if u.get(s) != w.get(s) {
            return Err(ChartError::BaseMismatch(s.clone()));
        }
        for j in 0..charts.base_dim() {
            let s = charts.jet_sym(a, j);
            if u.get(s) != w.get(s) {
                return Err(ChartError::BaseMismatch(s.clone()));
            }
        }
    }

    let mut acc = BigRational::from_integer(0.into());
    for a in 0..charts.fiber_dim() {
        for l in 0..charts.base_dim() {
            acc += u.get(charts.dmomentum_sym(a, l, l)) * w.get(charts.dfiber_sym(a));
        }
        for j in 0..charts.base_dim() {
            acc += u.get(charts.momentum_sym(a, j)) * w.get(charts.djet_sym(a, j));
        }
    }
    Ok(acc)
}

/// Sparse antisymmetric two-form component table over one chart's
/// coordinates. Both orientations of every entry are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoForm {
    chart: Chart,
    entries: BTreeMap<(Symbol, Symbol), BigRational>,
}

impl TwoForm {
    pub fn new(chart: Chart) -> TwoForm {
        TwoForm {
            chart,
            entries: BTreeMap::new(),
        }
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    /// Add `c` to the (s, t) component and `-c` to (t, s).
    pub fn add(&mut self, s: &Symbol, t: &Symbol, c: BigRational) {
        if c == BigRational::from_integer(0.into()) {
            return;
        }
        let e = self
            .entries
            .entry((s.clone(), t.clone()))
            .or_insert_with(|| BigRational::from_integer(0.into()));
        *e += &c;
        if *e == BigRational::from_integer(0.into()) {
            self.entries.remove(&(s.clone(), t.clone()));
        }
        let e = self
            .entries
            .entry((t.clone(), s.clone()))
            .or_insert_with(|| BigRational::from_integer(0.into()));
        *e -= &c;
        if *e == BigRational::from_integer(0.into()) {
            self.entries.remove(&(t.clone(), s.clone()));
        }
    }

    pub fn component(&self, s: &Symbol, t: &Symbol) -> BigRational {
        self.entries
            .get(&(s.clone(), t.clone()))
            .cloned()
            .unwrap_or_else(|| BigRational::from_integer(0.into()))
    }

    pub fn entries(&self) -> &BTreeMap<(Symbol, Symbol), BigRational> {
        &self.entries
    }

    /// Entries with the first symbol strictly below the second: one
    /// representative per antisymmetric pair.
    pub fn upper_entries(&self) -> impl Iterator<Item = (&(Symbol, Symbol), &BigRational)> {
        self.entries.iter().filter(|((s, t), _)| s < t)
    }

    pub fn negated(&self) -> TwoForm {
        TwoForm {
            chart: self.chart,
            entries: self
                .entries
                .iter()
                .map(|(k, v)| (k.clone(), -v.clone()))
                .collect(),
        }
    }
}

/// The canonical form coefficients of the phase-space geometry, all relative
/// to the coordinate volume basis.
#[derive(Debug, Clone)]
pub struct CanonicalForms {
    /// theta_P = p_a_i dy_a (x) eta_i, stored as [i][a] -> p_a_i.
    pub theta_p: Vec<Vec<Expr>>,
    /// omega on the jet prolongation of the phase bundle:
    /// sum_{a,i} d(dp_a_i_i) ^ d(y_a) + sum_{a,j} d(p_a_j) ^ d(y_a_j).
    pub omega_j1p: TwoForm,
    /// omega on the affine phase bundle:
    /// sum_a d(xi_a) ^ d(y_a) + sum_{a,k} d(v_a_k) ^ d(p_a_k).
    pub omega_pjdag: TwoForm,
}

/// Component tables of the canonical forms for one chart set.
pub fn canonical_forms(charts: &ChartSet) -> CanonicalForms {
    let m = charts.base_dim();
    let n = charts.fiber_dim();
    let one = || BigRational::from_integer(1.into());

    let theta_p: Vec<Vec<Expr>> = (0..m)
        .map(|i| (0..n).map(|a| Expr::sym(charts.momentum_sym(a, i))).collect())
        .collect();

    let mut omega_j1p = TwoForm::new(Chart::J1P);
    for a in 0..n {
        for i in 0..m {
            omega_j1p.add(charts.dmomentum_sym(a, i, i), charts.fiber_sym(a), one());
        }
        for j in 0..m {
            omega_j1p.add(charts.momentum_sym(a, j), charts.jet_sym(a, j), one());
        }
    }

    let mut omega_pjdag = TwoForm::new(Chart::PJdagE);
    for a in 0..n {
        omega_pjdag.add(charts.xi_sym(a), charts.fiber_sym(a), one());
        for k in 0..m {
            omega_pjdag.add(charts.vel_sym(a, k), charts.momentum_sym(a, k), one());
        }
    }

    CanonicalForms {
        theta_p,
        omega_j1p,
        omega_pjdag,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigInt;

    fn rat(v: i64) -> BigRational {
        BigRational::from(BigInt::from(v))
    }

    fn names(prefix: &str, k: usize) -> Vec<String> {
        (1..=k).map(|i| format!("{prefix}{i}")).collect()
    }

    fn charts(m: usize, n: usize) -> ChartSet {
        ChartSet::build(&names("x", m), &names("y", n)).unwrap()
    }

    fn sym_names(list: &[Symbol]) -> Vec<&str> {
        list.iter().map(|s| s.name()).collect()
    }

    #[test]
    fn mechanics_case_chart_lists() {
        let cs = charts(1, 1);
        assert_eq!(sym_names(cs.symbols(Chart::J1E)), ["x1", "y1", "y1_1"]);
        assert_eq!(sym_names(cs.symbols(Chart::P)), ["x1", "y1", "p1_1"]);
        assert_eq!(
            sym_names(cs.symbols(Chart::J1P)),
            ["x1", "y1", "p1_1", "y1_1", "dp1_1_1"]
        );
    }

    #[test]
    fn three_momentum_components_for_scalar_field_in_space() {
        let cs = charts(3, 1);
        let p: Vec<&str> = cs
            .symbols(Chart::P)
            .iter()
            .skip(4)
            .map(|s| s.name())
            .collect();
        assert_eq!(p, ["p1_1", "p1_2", "p1_3"]);
    }

    #[test]
    fn second_jet_symbols_are_symmetrized() {
        let cs = charts(2, 2);
        let j2: Vec<&str> = cs
            .symbols(Chart::J2E)
            .iter()
            .skip(2 + 2 + 4)
            .map(|s| s.name())
            .collect();
        assert_eq!(
            j2,
            ["y1_1_1", "y1_1_2", "y1_2_2", "y2_1_1", "y2_1_2", "y2_2_2"]
        );
        // oracle: brute enumeration of pairs j <= k gives n*m*(m+1)/2
        let mut count = 0;
        for _a in 0..2 {
            for j in 1..=2 {
                for k in j..=2 {
                    let _ = (j, k);
                    count += 1;
                }
            }
        }
        assert_eq!(j2.len(), count);
    }

    #[test]
    fn jet2_accessor_orders_indices() {
        let cs = charts(3, 1);
        assert_eq!(cs.jet2_sym(0, 2, 0).name(), "y1_1_3");
        assert_eq!(cs.jet2_sym(0, 1, 1).name(), "y1_2_2");
        assert_eq!(cs.jet2_sym(0, 0, 2).name(), "y1_1_3");
    }

    #[test]
    fn chart_sizes_match_construction_counts() {
        for m in 1..=4usize {
            for n in 1..=4usize {
                let cs = charts(m, n);
                assert_eq!(cs.symbols(Chart::E).len(), m + n);
                assert_eq!(cs.symbols(Chart::J1E).len(), m + n + n * m);
                assert_eq!(
                    cs.symbols(Chart::J2E).len(),
                    m + n + n * m + n * m * (m + 1) / 2
                );
                assert_eq!(cs.symbols(Chart::VE).len(), m + n + n);
                assert_eq!(cs.symbols(Chart::VJ1E).len(), m + n + n * m + n + n * m);
                assert_eq!(cs.symbols(Chart::J1VE).len(), m + n + n + n * m + n * m);
                assert_eq!(cs.symbols(Chart::P).len(), m + n + n * m);
                assert_eq!(
                    cs.symbols(Chart::J1P).len(),
                    m + n + n * m + n * m + n * m * m
                );
                assert_eq!(cs.symbols(Chart::JdagE).len(), m + n + n * m + 1);
                assert_eq!(cs.symbols(Chart::PJdagE).len(), m + n + n * m + n + n * m);
            }
        }
    }

    #[test]
    fn name_collision_is_rejected() {
        let err = ChartSet::build(
            &["x1".to_string()],
            &["y1".to_string(), "y1_1".to_string()],
        )
        .unwrap_err();
        assert!(matches!(err, ChartError::NameCollision(s) if s == "y1_1"));

        let err =
            ChartSet::build(&["x1".to_string()], &["r".to_string()]).unwrap_err();
        assert!(matches!(err, ChartError::NameCollision(s) if s == "r"));
    }

    #[test]
    fn kappa_flip_relabels_components() {
        let cs = charts(1, 1);
        let mut vals = BTreeMap::new();
        vals.insert(Symbol::new("x1"), rat(0));
        vals.insert(Symbol::new("y1"), rat(1));
        vals.insert(Symbol::new("y1_1"), rat(2));
        vals.insert(Symbol::new("dy1"), rat(3));
        vals.insert(Symbol::new("dy1_1"), rat(4));
        let w = ChartPoint::new(&cs, Chart::VJ1E, vals).unwrap();
        let flipped = kappa_flip(&cs, &w).unwrap();
        assert_eq!(flipped.chart(), Chart::J1VE);
        assert_eq!(flipped.get(&Symbol::new("dy1")), &rat(3));
        assert_eq!(flipped.get(&Symbol::new("y1_1")), &rat(2));
        let back = kappa_flip_inv(&cs, &flipped).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn kappa_flip_rejects_wrong_chart() {
        let cs = charts(1, 1);
        let mut vals = BTreeMap::new();
        for s in cs.symbols(Chart::J1VE) {
            vals.insert(s.clone(), rat(0));
        }
        let w = ChartPoint::new(&cs, Chart::J1VE, vals).unwrap();
        assert!(matches!(
            kappa_flip(&cs, &w),
            Err(ChartError::ChartMismatch { .. })
        ));
    }

    fn point_with(
        cs: &ChartSet,
        chart: Chart,
        assignments: &[(&str, i64)],
    ) -> ChartPoint {
        let mut vals = BTreeMap::new();
        for s in cs.symbols(chart) {
            vals.insert(s.clone(), rat(0));
        }
        for (name, v) in assignments {
            vals.insert(Symbol::new(name), rat(*v));
        }
        ChartPoint::new(cs, chart, vals).unwrap()
    }

    #[test]
    fn jet_pairing_mechanics_example() {
        let cs = charts(1, 1);
        let u = point_with(&cs, Chart::J1P, &[("p1_1", 2), ("dp1_1_1", 5)]);
        let w = point_with(&cs, Chart::J1VE, &[("dy1", 1), ("dy1_1", 3)]);
        assert_eq!(jet_pairing(&cs, &u, &w).unwrap(), rat(11));
    }

    #[test]
    fn jet_pairing_vanishes_on_zero_vertical_part() {
        let cs = charts(2, 1);
        let u = point_with(&cs, Chart::J1P, &[("p1_1", 7), ("dp1_2_2", 9)]);
        let w = point_with(&cs, Chart::J1VE, &[]);
        assert_eq!(jet_pairing(&cs, &u, &w).unwrap(), rat(0));
    }

    #[test]
    fn jet_pairing_two_dim_example() {
        // hand substitution into the coordinate formula:
        // dp1_2_2*dy1 + p1_1*dy1_1 = 4*2 + 1*7 = 15
        let cs = charts(2, 1);
        let u = point_with(
            &cs,
            Chart::J1P,
            &[("p1_1", 1), ("p1_2", 0), ("dp1_1_1", 0), ("dp1_2_2", 4)],
        );
        let w = point_with(&cs, Chart::J1VE, &[("dy1", 2), ("dy1_1", 7), ("dy1_2", 0)]);
        assert_eq!(jet_pairing(&cs, &u, &w).unwrap(), rat(15));
    }

    #[test]
    fn jet_pairing_detects_base_mismatch() {
        let cs = charts(1, 1);
        let u = point_with(&cs, Chart::J1P, &[("y1", 1)]);
        let w = point_with(&cs, Chart::J1VE, &[("y1", 2)]);
        assert!(matches!(
            jet_pairing(&cs, &u, &w),
            Err(ChartError::BaseMismatch(s)) if s.name() == "y1"
        ));
    }

    #[test]
    fn canonical_forms_mechanics_case() {
        let cs = charts(1, 1);
        let forms = canonical_forms(&cs);
        assert_eq!(forms.theta_p.len(), 1);
        assert_eq!(forms.theta_p[0][0], Expr::sym(&Symbol::new("p1_1")));
        assert_eq!(
            forms
                .omega_j1p
                .component(&Symbol::new("dp1_1_1"), &Symbol::new("y1")),
            rat(1)
        );
        assert_eq!(
            forms
                .omega_j1p
                .component(&Symbol::new("p1_1"), &Symbol::new("y1_1")),
            rat(1)
        );
        assert_eq!(
            forms
                .omega_j1p
                .component(&Symbol::new("y1"), &Symbol::new("dp1_1_1")),
            rat(-1)
        );
    }

    #[test]
    fn canonical_forms_tables_are_antisymmetric() {
        let cs = charts(2, 2);
        let forms = canonical_forms(&cs);
        for form in [&forms.omega_j1p, &forms.omega_pjdag] {
            for ((s, t), c) in form.entries() {
                assert_eq!(form.component(t, s), -c.clone());
            }
        }
    }

    #[test]
    fn omega_pjdag_two_dim_entries() {
        // expanding the displayed two-form by hand for m = 2, n = 1
        let cs = charts(2, 1);
        let forms = canonical_forms(&cs);
        let pairs = [("xi1", "y1"), ("v1_1", "p1_1"), ("v1_2", "p1_2")];
        for (s, t) in pairs {
            assert_eq!(
                forms
                    .omega_pjdag
                    .component(&Symbol::new(s), &Symbol::new(t)),
                rat(1)
            );
        }
        assert_eq!(forms.omega_pjdag.upper_entries().count() * 2, forms.omega_pjdag.entries().len());
        assert_eq!(forms.omega_pjdag.entries().len(), 6);
    }
}
