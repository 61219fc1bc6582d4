use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::opcore::{CMat, Tolerances};
use crate::quantum::{Density, Observable, Projector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ItemKind {
    /// Values 0 and 1.
    Projector,
    /// Values −1 and +1.
    Dichotomic,
}

/// A labeled projector or ±1-valued observable of a scenario.
#[derive(Debug, Clone)]
pub struct Item {
    label: String,
    kind: ItemKind,
    mat: CMat,
    up: CMat,
}

impl Item {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> ItemKind {
        self.kind
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    /// Spectral projector for the value selected by `bit` (1 or +1 when set).
    pub fn factor(&self, bit: bool) -> CMat {
        if bit {
            self.up.clone()
        } else {
            CMat::identity(self.mat.dim()) - &self.up
        }
    }

    pub fn up(&self) -> &CMat {
        &self.up
    }

    pub fn value(&self, bit: bool) -> i8 {
        match (self.kind, bit) {
            (ItemKind::Projector, b) => b as i8,
            (ItemKind::Dichotomic, true) => 1,
            (ItemKind::Dichotomic, false) => -1,
        }
    }

    /// Human-readable event name, e.g. `P=1` or `A=+1`.
    pub fn event_name(&self, bit: bool) -> String {
        match self.kind {
            ItemKind::Projector => format!("{}={}", self.label, bit as u8),
            ItemKind::Dichotomic => format!("{}={}", self.label, if bit { "+1" } else { "-1" }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ItemSpec {
    pub label: String,
    pub kind: ItemKind,
    pub mat: CMat,
}

#[derive(Debug, Clone, Default)]
pub struct ContextSpec {
    pub labels: Vec<String>,
    /// Declares that the context's projectors sum to the identity.
    pub resolves_identity: bool,
}

#[derive(Debug, Clone)]
pub struct ProductSpec {
    pub labels: Vec<String>,
    pub sign: i8,
}

/// The two settings of each party in a CHSH scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChshRoles {
    pub alice: [String; 2],
    pub bob: [String; 2],
}

#[derive(Debug, Clone)]
pub struct Context {
    pub items: Vec<usize>,
    pub resolves_identity: bool,
}

#[derive(Debug, Clone)]
pub struct ProductConstraint {
    pub items: Vec<usize>,
    pub sign: i8,
}

/// A finite measurement scenario.
///
/// Items are stored sorted by label; contexts and products refer to them by
/// index. Construction checks that every context is pairwise commuting, that
/// declared products equal `±I` and that declared identity resolutions sum
/// to `I`.
#[derive(Debug, Clone)]
pub struct Scenario {
    dim: usize,
    items: Vec<Item>,
    contexts: Vec<Context>,
    products: Vec<ProductConstraint>,
    state: Option<Density>,
    chsh: Option<ChshRoles>,
    tols: Tolerances,
}

impl Scenario {
    pub fn new(
        dim: usize,
        items: Vec<ItemSpec>,
        contexts: Vec<ContextSpec>,
        products: Vec<ProductSpec>,
        state: Option<Density>,
        chsh: Option<ChshRoles>,
        tols: Tolerances,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidScenario("dimension must be positive".into()));
        }
        let mut specs = items;
        specs.sort_by(|a, b| a.label.cmp(&b.label));
        for w in specs.windows(2) {
            if w[0].label == w[1].label {
                return Err(Error::InvalidScenario(format!("duplicate item label `{}`", w[0].label)));
            }
        }
        let mut built = Vec::with_capacity(specs.len());
        for s in specs {
            if s.label.is_empty() {
                return Err(Error::InvalidScenario("empty item label".into()));
            }
            if s.mat.dim() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: s.mat.dim() });
            }
            built.push(build_item(s, tols)?);
        }

        let index = |label: &str| -> Result<usize> {
            built
                .binary_search_by(|it: &Item| it.label.as_str().cmp(label))
                .map_err(|_| Error::UnregisteredObservable(label.to_string()))
        };
        let resolve = |labels: &[String]| -> Result<Vec<usize>> {
            let mut idx = labels.iter().map(|l| index(l)).collect::<Result<Vec<_>>>()?;
            idx.sort_unstable();
            if idx.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidScenario(format!("repeated label in {labels:?}")));
            }
            Ok(idx)
        };

        let mut ctxs = Vec::with_capacity(contexts.len());
        for c in contexts {
            let idx = resolve(&c.labels)?;
            check_commuting(&built, &idx, tols)?;
            if c.resolves_identity {
                let mut sum = CMat::zeros(dim);
                for &i in &idx {
                    if built[i].kind != ItemKind::Projector {
                        return Err(Error::InvalidScenario(format!(
                            "identity resolution contains non-projector `{}`",
                            built[i].label
                        )));
                    }
                    sum = sum + &built[i].mat;
                }
                let r = sum.distance(&CMat::identity(dim));
                if r > tols.tol {
                    return Err(Error::InvalidScenario(format!(
                        "context {:?} does not resolve the identity (residual {r:e})",
                        c.labels
                    )));
                }
            }
            ctxs.push(Context { items: idx, resolves_identity: c.resolves_identity });
        }

        let mut prods = Vec::with_capacity(products.len());
        for p in products {
            if p.sign != 1 && p.sign != -1 {
                return Err(Error::InvalidScenario(format!("product sign must be +1 or -1, got {}", p.sign)));
            }
            let idx = resolve(&p.labels)?;
            check_commuting(&built, &idx, tols)?;
            let mut prod = CMat::identity(dim);
            for &i in &idx {
                prod = prod * &built[i].mat;
            }
            let r = prod.distance(&CMat::identity(dim).scale(p.sign as f64));
            if r > tols.tol {
                return Err(Error::InvalidScenario(format!(
                    "product of {:?} is not {}I (residual {r:e})",
                    p.labels,
                    if p.sign > 0 { "+" } else { "-" }
                )));
            }
            prods.push(ProductConstraint { items: idx, sign: p.sign });
        }

        if let Some(d) = &state {
            if d.dim() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: d.dim() });
            }
        }
        if let Some(roles) = &chsh {
            for l in roles.alice.iter().chain(&roles.bob) {
                let i = index(l)?;
                if built[i].kind != ItemKind::Dichotomic {
                    return Err(Error::WrongScenarioShape(format!("CHSH setting `{l}` must be dichotomic")));
                }
            }
        }
        Ok(Self { dim, items: built, contexts: ctxs, products: prods, state, chsh, tols })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn products(&self) -> &[ProductConstraint] {
        &self.products
    }

    pub fn state(&self) -> Option<&Density> {
        self.state.as_ref()
    }

    pub fn chsh(&self) -> Option<&ChshRoles> {
        self.chsh.as_ref()
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tols
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.items
            .binary_search_by(|it| it.label.as_str().cmp(label))
            .map_err(|_| Error::UnregisteredObservable(label.to_string()))
    }

    pub fn with_state(&self, state: Density) -> Result<Self> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: state.dim() });
        }
        Ok(Self { state: Some(state), ..self.clone() })
    }

    /// Replaces item matrices and revalidates every context and product.
    pub fn with_matrices(&self, replacements: &[(&str, CMat)]) -> Result<Self> {
        let mut items = self.item_specs();
        for (label, m) in replacements {
            let i = self.index_of(label)?;
            items[i].mat = m.clone();
        }
        Self::new(
            self.dim,
            items,
            self.context_specs(),
            self.product_specs(),
            self.state.clone(),
            self.chsh.clone(),
            self.tols,
        )
    }

    pub fn item_specs(&self) -> Vec<ItemSpec> {
        self.items
            .iter()
            .map(|it| ItemSpec { label: it.label.clone(), kind: it.kind, mat: it.mat.clone() })
            .collect()
    }

    pub fn context_specs(&self) -> Vec<ContextSpec> {
        self.contexts
            .iter()
            .map(|c| ContextSpec { labels: self.labels_of(&c.items), resolves_identity: c.resolves_identity })
            .collect()
    }

    pub fn product_specs(&self) -> Vec<ProductSpec> {
        self.products
            .iter()
            .map(|p| ProductSpec { labels: self.labels_of(&p.items), sign: p.sign })
            .collect()
    }

    fn labels_of(&self, idx: &[usize]) -> Vec<String> {
        idx.iter().map(|&i| self.items[i].label.clone()).collect()
    }

    /// Commuting item sets whose value patterns are constrained jointly:
    /// declared contexts, product constraints and each item on its own.
    pub(crate) fn constraint_groups(&self) -> Vec<Vec<usize>> {
        let mut groups: BTreeSet<Vec<usize>> = BTreeSet::new();
        groups.extend(self.contexts.iter().map(|c| c.items.clone()));
        groups.extend(self.products.iter().map(|p| p.items.clone()));
        groups.extend((0..self.items.len()).map(|i| vec![i]));
        groups.into_iter().filter(|g| !g.is_empty()).collect()
    }

    /// Unordered item pairs sharing a context or product constraint.
    pub fn context_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = BTreeSet::new();
        for g in self.constraint_groups() {
            for (k, &i) in g.iter().enumerate() {
                for &j in &g[k + 1..] {
                    pairs.insert((i, j));
                }
            }
        }
        pairs.into_iter().collect()
    }
}

fn build_item(s: ItemSpec, tols: Tolerances) -> Result<Item> {
    let n = s.mat.dim();
    let up = match s.kind {
        ItemKind::Projector => Projector::new(s.mat.clone(), tols)
            .map_err(|e| Error::InvalidScenario(format!("`{}`: {e}", s.label)))?
            .mat()
            .clone(),
        ItemKind::Dichotomic => {
            let obs = Observable::new(s.mat.clone(), tols)?;
            let slack = tols.cluster_gap.max(tols.tol);
            for v in obs.eigenvalues() {
                if (v.abs() - 1.0).abs() > slack {
                    return Err(Error::NotDichotomic { label: s.label.clone(), eigenvalue: v });
                }
            }
            (CMat::identity(n) + &s.mat).scale(0.5)
        }
    };
    Ok(Item { label: s.label, kind: s.kind, mat: s.mat, up })
}

fn check_commuting(items: &[Item], idx: &[usize], tols: Tolerances) -> Result<()> {
    for (k, &i) in idx.iter().enumerate() {
        for &j in &idx[k + 1..] {
            let norm = items[i].mat.commutator(&items[j].mat).op_norm();
            if norm > tols.tol {
                return Err(Error::NotCommuting {
                    a: items[i].label.clone(),
                    b: items[j].label.clone(),
                    norm,
                });
            }
        }
    }
    Ok(())
}
