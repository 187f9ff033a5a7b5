//! Graphon functionals `τ` addressed by name.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graphon::{
    empirical_graphon, homomorphism_count, subgraph_density, subgraph_density_gradient, LabeledGraph,
    StepGraphon, SubgraphPattern,
};

/// A real functional of graphons, continuous in the cut metric.
pub trait Functional: Send + Sync {
    fn name(&self) -> String;

    fn value(&self, w: &StepGraphon) -> Result<f64>;

    /// Gradient with respect to the block values, normalized by block masses
    /// as in [`subgraph_density_gradient`]; row-major and symmetric.
    fn gradient(&self, w: &StepGraphon) -> Result<Vec<f64>>;

    /// Value on the empirical graphon of `g`.
    fn graph_value(&self, g: &LabeledGraph) -> Result<f64> {
        self.value(&empirical_graphon(g))
    }

    /// True if the value depends on a graph only through its degree sequence.
    fn degree_determined(&self) -> bool {
        false
    }
}

/// `t(H, W)`.
#[derive(Debug, Clone)]
pub struct SubgraphDensity(pub SubgraphPattern);

impl Functional for SubgraphDensity {
    fn name(&self) -> String {
        format!("density:{}", self.0)
    }

    fn value(&self, w: &StepGraphon) -> Result<f64> {
        subgraph_density(&self.0, w)
    }

    fn gradient(&self, w: &StepGraphon) -> Result<Vec<f64>> {
        subgraph_density_gradient(&self.0, w)
    }

    fn graph_value(&self, g: &LabeledGraph) -> Result<f64> {
        let hom = homomorphism_count(&self.0, g);
        Ok(hom as f64 / (g.n() as f64).powi(self.0.vertex_count() as i32))
    }

    fn degree_determined(&self) -> bool {
        // single edges and stars are sums of powers of degrees
        let h = &self.0;
        h.edges().len() <= 1 || h.edges().iter().all(|&(u, _)| u == 0)
    }
}

/// `τ ≡ c`.
#[derive(Debug, Clone, Copy)]
pub struct Constant(pub f64);

impl Functional for Constant {
    fn name(&self) -> String {
        format!("constant:{}", self.0)
    }

    fn value(&self, _: &StepGraphon) -> Result<f64> {
        Ok(self.0)
    }

    fn gradient(&self, w: &StepGraphon) -> Result<Vec<f64>> {
        Ok(vec![0.0; w.block_count() * w.block_count()])
    }

    fn graph_value(&self, _: &LabeledGraph) -> Result<f64> {
        Ok(self.0)
    }

    fn degree_determined(&self) -> bool {
        true
    }
}

/// `c · τ`.
pub struct Scaled(pub f64, pub Arc<dyn Functional>);

impl Functional for Scaled {
    fn name(&self) -> String {
        format!("scale:{}:{}", self.0, self.1.name())
    }

    fn value(&self, w: &StepGraphon) -> Result<f64> {
        Ok(self.0 * self.1.value(w)?)
    }

    fn gradient(&self, w: &StepGraphon) -> Result<Vec<f64>> {
        Ok(self.1.gradient(w)?.into_iter().map(|g| self.0 * g).collect())
    }

    fn graph_value(&self, g: &LabeledGraph) -> Result<f64> {
        Ok(self.0 * self.1.graph_value(g)?)
    }

    fn degree_determined(&self) -> bool {
        self.1.degree_determined()
    }
}

pub type Factory = Arc<dyn Fn(&str) -> Result<Arc<dyn Functional>> + Send + Sync>;

/// Resolves functional specifications such as `triangle`, `density:cycle4`,
/// `density:3:1-2,2-3`, `constant:0.2`, `scale:2:triangle`.
///
/// A specification is `name` or `name:params`; `params` is handed to the
/// factory registered under `name`. A bare pattern name is shorthand for
/// `density:<pattern>`.
#[derive(Clone)]
pub struct FunctionalRegistry {
    factories: BTreeMap<String, Factory>,
}

impl Default for FunctionalRegistry {
    fn default() -> Self {
        let mut r = Self { factories: BTreeMap::new() };
        r.register("density", |p| Ok(Arc::new(SubgraphDensity(SubgraphPattern::parse(p)?)) as Arc<dyn Functional>));
        r.register("constant", |p| {
            let c: f64 = p.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad constant `{p}`")))?;
            Ok(Arc::new(Constant(c)) as Arc<dyn Functional>)
        });
        r.register("zero", |_| Ok(Arc::new(Constant(0.0)) as Arc<dyn Functional>));
        r.register("scale", |p| {
            let (c, rest) = p.split_once(':').ok_or_else(|| Error::InvalidArgument(format!("bad scale `{p}`")))?;
            let c: f64 = c.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad factor `{c}`")))?;
            let inner = FunctionalRegistry::default().resolve(rest)?;
            Ok(Arc::new(Scaled(c, inner)) as Arc<dyn Functional>)
        });
        r
    }
}

impl FunctionalRegistry {
    pub fn register(
        &mut self,
        name: &str,
        factory: impl Fn(&str) -> Result<Arc<dyn Functional>> + Send + Sync + 'static,
    ) {
        self.factories.insert(name.to_string(), Arc::new(factory));
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn resolve(&self, spec: &str) -> Result<Arc<dyn Functional>> {
        let spec = spec.trim();
        let (name, params) = spec.split_once(':').unwrap_or((spec, ""));
        if let Some(f) = self.factories.get(name) {
            return f(params);
        }
        match SubgraphPattern::parse(spec) {
            Ok(p) => Ok(Arc::new(SubgraphDensity(p))),
            Err(_) => Err(Error::UnknownFunctional(spec.to_string())),
        }
    }
}
