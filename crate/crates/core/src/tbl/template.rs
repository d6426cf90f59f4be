use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Position;

pub const MAX_TEMPLATE_SLOTS: usize = 4;

const DEFAULT_PACK: &str = include_str!("../../../../templates/default.json");

/// Which positions a learned rule tests; the values are filled in from the
/// training errors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub id: usize,
    pub positions: Vec<Position>,
}

impl Template {
    pub fn new(id: usize, positions: Vec<Position>) -> Self {
        Template { id, positions }
    }

    pub fn validate(&self) -> Result<()> {
        if self.positions.is_empty() || self.positions.len() > MAX_TEMPLATE_SLOTS {
            return Err(Error::invalid(format!(
                "template {} must test 1 to {MAX_TEMPLATE_SLOTS} positions",
                self.id
            )));
        }
        Ok(())
    }
}

pub fn parse_templates(json: &str) -> Result<Vec<Template>> {
    let pack: Vec<Template> = serde_json::from_str(json)?;
    pack.iter().try_for_each(Template::validate)?;
    Ok(pack)
}

/// The shipped template pack.
pub fn default_templates() -> Vec<Template> {
    parse_templates(DEFAULT_PACK).expect("shipped template pack is valid")
}
