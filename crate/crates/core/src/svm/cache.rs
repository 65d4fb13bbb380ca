//! Kernel-row storage for the SMO solver.
//!
//! Up to [`FULL_GRAM_LIMIT`] training points every row is kept once computed
//! (the Gram matrix, filled lazily). Above that a fixed number of rows is
//! retained with least-recently-used eviction.

use crate::data::Dataset;

use super::kernel::rbf;

pub(crate) const FULL_GRAM_LIMIT: usize = 8_000;

/// Memory budget for the LRU row cache.
const LRU_BYTES: usize = 256 << 20;

enum Store {
    Full(Vec<Option<Box<[f64]>>>),
    Lru {
        slot_of: Vec<Option<usize>>,
        slots: Vec<(usize, Box<[f64]>, u64)>,
        capacity: usize,
        clock: u64,
    },
}

pub(crate) struct KernelRows<'a> {
    data: &'a Dataset,
    gamma: f64,
    store: Store,
    pub(crate) computed: u64,
}

impl<'a> KernelRows<'a> {
    pub(crate) fn new(data: &'a Dataset, gamma: f64) -> Self {
        let n = data.len();
        if n <= FULL_GRAM_LIMIT {
            Self {
                data,
                gamma,
                store: Store::Full(vec![None; n]),
                computed: 0,
            }
        } else {
            Self::lru(data, gamma, LRU_BYTES / (n * std::mem::size_of::<f64>()))
        }
    }

    pub(crate) fn lru(data: &'a Dataset, gamma: f64, capacity: usize) -> Self {
        let capacity = capacity.max(2);
        Self {
            data,
            gamma,
            store: Store::Lru {
                slot_of: vec![None; data.len()],
                slots: Vec::with_capacity(capacity),
                capacity,
                clock: 0,
            },
            computed: 0,
        }
    }

    fn compute(&mut self, i: usize) -> Box<[f64]> {
        self.computed += 1;
        let xi = self.data.row(i);
        self.data.rows().map(|xt| rbf(xi, xt, self.gamma)).collect()
    }

    /// Row `i` of the kernel matrix, `K[i][t]` for every training point `t`.
    pub(crate) fn row(&mut self, i: usize) -> &[f64] {
        let missing = match &self.store {
            Store::Full(rows) => rows[i].is_none(),
            Store::Lru { slot_of, .. } => slot_of[i].is_none(),
        };
        let fresh = missing.then(|| self.compute(i));
        match &mut self.store {
            Store::Full(rows) => {
                if let Some(r) = fresh {
                    rows[i] = Some(r);
                }
                rows[i].as_deref().expect("row present")
            }
            Store::Lru {
                slot_of,
                slots,
                capacity,
                clock,
            } => {
                *clock += 1;
                let slot = match (slot_of[i], fresh) {
                    (Some(s), _) => s,
                    (None, Some(r)) if slots.len() < *capacity => {
                        slots.push((i, r, 0));
                        slots.len() - 1
                    }
                    (None, Some(r)) => {
                        let victim = slots
                            .iter()
                            .enumerate()
                            .min_by_key(|(_, (_, _, used))| *used)
                            .map(|(s, _)| s)
                            .expect("capacity >= 2");
                        slot_of[slots[victim].0] = None;
                        slots[victim] = (i, r, 0);
                        victim
                    }
                    (None, None) => unreachable!(),
                };
                slot_of[i] = Some(slot);
                slots[slot].2 = *clock;
                &slots[slot].1
            }
        }
    }
}
