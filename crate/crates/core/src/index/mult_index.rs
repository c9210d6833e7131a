//! Several independently seeded copies of one method, with merged answers.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::index::{build, Index, IndexBox, IndexContext};
use crate::params::ParamMap;
use crate::query::Query;

pub struct MultIndex {
    copies: Vec<IndexBox>,
}

/// Seed of copy `i`; copy 0 keeps the base seed.
pub fn copy_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add((i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

impl MultIndex {
    /// Index-time: `methodName` (required), `indexQty` (2); every other parameter goes to each copy.
    pub fn build(ctx: &IndexContext, p: &mut ParamMap) -> Result<Self> {
        let method: String = p.required("methodName")?;
        let qty: usize = p.optional("indexQty", 2usize)?;
        if qty == 0 {
            return Err(Error::InvalidArgument("indexQty must be positive".into()));
        }
        if method == "mult_index" {
            return Err(Error::InvalidArgument("mult_index cannot nest itself".into()));
        }
        let copies = (0..qty)
            .map(|i| build(&method, &ctx.with_seed(copy_seed(ctx.seed, i)), p))
            .collect::<Result<Vec<_>>>()?;
        Ok(MultIndex { copies })
    }

    pub fn copies(&self) -> &[IndexBox] {
        &self.copies
    }
}

impl Index for MultIndex {
    fn method(&self) -> &'static str {
        "mult_index"
    }

    fn search(&self, q: &mut Query<'_>) -> Result<()> {
        for c in &self.copies {
            let mut sub = q.fresh();
            c.search(&mut sub)?;
            q.absorb(&sub);
        }
        Ok(())
    }

    /// Query-time parameters are forwarded to every copy.
    fn set_query_time_params(&mut self, p: &mut ParamMap) -> Result<()> {
        for c in &mut self.copies {
            c.set_query_time_params(p)?;
        }
        Ok(())
    }

    fn size_bytes(&self) -> usize {
        self.copies.iter().map(|c| c.size_bytes()).sum()
    }
}
