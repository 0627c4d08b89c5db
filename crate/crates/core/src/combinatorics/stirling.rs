use std::sync::{Arc, Mutex, OnceLock};

use rug::Integer;

use crate::error::{Error, Result};

/// Exact Stirling numbers of the second kind S(m, l) and signed Stirling
/// numbers of the first kind s(m, l) for 0 ≤ l, m ≤ cap.
#[derive(Clone, Debug)]
pub struct StirlingCache {
    cap: usize,
    second: Vec<Vec<Integer>>,
    first: Vec<Vec<Integer>>,
}

impl StirlingCache {
    pub const DEFAULT_CAP: usize = 30;

    /// Builds both triangles up to row `cap`.
    pub fn new(cap: usize) -> Self {
        let mut second: Vec<Vec<Integer>> = Vec::with_capacity(cap + 1);
        let mut first: Vec<Vec<Integer>> = Vec::with_capacity(cap + 1);
        second.push(vec![Integer::from(1)]);
        first.push(vec![Integer::from(1)]);
        for m in 0..cap {
            let prev2 = &second[m];
            let prev1 = &first[m];
            let mut row2 = vec![Integer::new(); m + 2];
            let mut row1 = vec![Integer::new(); m + 2];
            for l in 1..=m + 1 {
                // S(m+1,l) = l S(m,l) + S(m,l-1)
                let mut v = Integer::from(&prev2[l - 1]);
                if l <= m {
                    v += Integer::from(&prev2[l] * l as u64);
                }
                row2[l] = v;
                // s(m+1,l) = s(m,l-1) - m s(m,l)
                let mut w = Integer::from(&prev1[l - 1]);
                if l <= m {
                    w -= Integer::from(&prev1[l] * m as u64);
                }
                row1[l] = w;
            }
            second.push(row2);
            first.push(row1);
        }
        Self { cap, second, first }
    }

    /// A process-wide cache covering at least `cap` rows.
    pub fn shared(cap: usize) -> Arc<StirlingCache> {
        static SHARED: OnceLock<Mutex<Arc<StirlingCache>>> = OnceLock::new();
        let slot = SHARED.get_or_init(|| Mutex::new(Arc::new(StirlingCache::new(Self::DEFAULT_CAP))));
        let mut guard = slot.lock().expect("stirling cache lock");
        if guard.cap < cap {
            *guard = Arc::new(StirlingCache::new(cap.max(2 * guard.cap)));
        }
        Arc::clone(&guard)
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    fn check(&self, m: usize, l: usize) -> Result<()> {
        if m > self.cap || l > self.cap {
            return Err(Error::Unsupported(format!(
                "Stirling index ({m}, {l}) exceeds the cache cap {}",
                self.cap
            )));
        }
        Ok(())
    }

    /// S(m, l); zero for l > m.
    pub fn second_kind(&self, m: usize, l: usize) -> Result<&Integer> {
        self.check(m, l)?;
        Ok(self.second[m].get(l).unwrap_or(zero()))
    }

    /// s(m, l) with sign (-1)^(m-l); zero for l > m.
    pub fn first_kind_signed(&self, m: usize, l: usize) -> Result<&Integer> {
        self.check(m, l)?;
        Ok(self.first[m].get(l).unwrap_or(zero()))
    }

    pub(crate) fn second_row(&self, m: usize) -> &[Integer] {
        &self.second[m]
    }

    pub(crate) fn first_row(&self, m: usize) -> &[Integer] {
        &self.first[m]
    }
}

fn zero() -> &'static Integer {
    static ZERO: OnceLock<Integer> = OnceLock::new();
    ZERO.get_or_init(Integer::new)
}

/// S(m, l) for m, l ≤ [`StirlingCache::DEFAULT_CAP`].
pub fn stirling2(m: usize, l: usize) -> Result<Integer> {
    let cache = StirlingCache::shared(StirlingCache::DEFAULT_CAP);
    if m > StirlingCache::DEFAULT_CAP || l > StirlingCache::DEFAULT_CAP {
        return Err(Error::Unsupported(format!(
            "stirling2({m}, {l}) exceeds the cap {}",
            StirlingCache::DEFAULT_CAP
        )));
    }
    cache.second_kind(m, l).cloned()
}

/// s(m, l) for m, l ≤ [`StirlingCache::DEFAULT_CAP`].
pub fn stirling1_signed(m: usize, l: usize) -> Result<Integer> {
    let cache = StirlingCache::shared(StirlingCache::DEFAULT_CAP);
    if m > StirlingCache::DEFAULT_CAP || l > StirlingCache::DEFAULT_CAP {
        return Err(Error::Unsupported(format!(
            "stirling1_signed({m}, {l}) exceeds the cap {}",
            StirlingCache::DEFAULT_CAP
        )));
    }
    cache.first_kind_signed(m, l).cloned()
}
