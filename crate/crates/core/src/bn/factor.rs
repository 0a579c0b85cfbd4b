/// A non-negative table over a set of variables.
///
/// `vars` is kept sorted ascending; `values` is row-major with the last
/// variable varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    vars: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl Factor {
    pub fn scalar(value: f64) -> Self {
        Factor {
            vars: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
        }
    }

    /// Builds a factor over `vars` (any order) from values laid out in that order.
    pub fn from_table(vars: &[usize], cards: &[usize], values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), cards.iter().product::<usize>());
        let mut perm: Vec<usize> = (0..vars.len()).collect();
        perm.sort_by_key(|&i| vars[i]);
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return Factor {
                vars: vars.to_vec(),
                cards: cards.to_vec(),
                values,
            };
        }
        let sorted_vars: Vec<usize> = perm.iter().map(|&i| vars[i]).collect();
        let sorted_cards: Vec<usize> = perm.iter().map(|&i| cards[i]).collect();
        let src_strides = strides(cards);
        let mut out = vec![0.0; values.len()];
        let mut idx = vec![0usize; vars.len()];
        for slot in out.iter_mut() {
            let src: usize = perm
                .iter()
                .zip(&idx)
                .map(|(&orig, &s)| s * src_strides[orig])
                .sum();
            *slot = values[src];
            advance(&mut idx, &sorted_cards);
        }
        Factor {
            vars: sorted_vars,
            cards: sorted_cards,
            values: out,
        }
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn contains(&self, var: usize) -> bool {
        self.vars.binary_search(&var).is_ok()
    }

    /// Fixes `var` to `state` and drops it from the scope.
    pub fn reduce(&self, var: usize, state: usize) -> Factor {
        let Ok(pos) = self.vars.binary_search(&var) else {
            return self.clone();
        };
        let inner: usize = self.cards[pos + 1..].iter().product();
        let card = self.cards[pos];
        let outer = self.values.len() / (inner * card);
        let mut values = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let base = (o * card + state) * inner;
            values.extend_from_slice(&self.values[base..base + inner]);
        }
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        Factor { vars, cards, values }
    }

    /// Sums `var` out of the factor.
    pub fn marginalize(&self, var: usize) -> Factor {
        let Ok(pos) = self.vars.binary_search(&var) else {
            return self.clone();
        };
        let inner: usize = self.cards[pos + 1..].iter().product();
        let card = self.cards[pos];
        let outer = self.values.len() / (inner * card);
        let mut values = vec![0.0; outer * inner];
        for o in 0..outer {
            for s in 0..card {
                let base = (o * card + s) * inner;
                let dst = &mut values[o * inner..(o + 1) * inner];
                for (d, x) in dst.iter_mut().zip(&self.values[base..base + inner]) {
                    *d += x;
                }
            }
        }
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        Factor { vars, cards, values }
    }

    pub fn product(&self, other: &Factor) -> Factor {
        let mut vars = Vec::with_capacity(self.vars.len() + other.vars.len());
        let mut cards = Vec::with_capacity(vars.capacity());
        let (mut i, mut j) = (0, 0);
        while i < self.vars.len() || j < other.vars.len() {
            let take_self = j >= other.vars.len()
                || (i < self.vars.len() && self.vars[i] <= other.vars[j]);
            if take_self {
                if j < other.vars.len() && self.vars[i] == other.vars[j] {
                    j += 1;
                }
                vars.push(self.vars[i]);
                cards.push(self.cards[i]);
                i += 1;
            } else {
                vars.push(other.vars[j]);
                cards.push(other.cards[j]);
                j += 1;
            }
        }
        let stride_in = |f: &Factor| -> Vec<usize> {
            let own = strides(&f.cards);
            vars.iter()
                .map(|v| match f.vars.binary_search(v) {
                    Ok(p) => own[p],
                    Err(_) => 0,
                })
                .collect()
        };
        let sa = stride_in(self);
        let sb = stride_in(other);
        let len: usize = cards.iter().product();
        let mut values = Vec::with_capacity(len);
        let mut idx = vec![0usize; vars.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..len {
            values.push(self.values[ia] * other.values[ib]);
            // Odometer step, keeping both flat offsets in sync.
            for k in (0..vars.len()).rev() {
                idx[k] += 1;
                ia += sa[k];
                ib += sb[k];
                if idx[k] < cards[k] {
                    break;
                }
                ia -= sa[k] * cards[k];
                ib -= sb[k] * cards[k];
                idx[k] = 0;
            }
        }
        Factor { vars, cards, values }
    }
}

pub(crate) fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for k in (0..cards.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * cards[k + 1];
    }
    s
}

pub(crate) fn advance(idx: &mut [usize], cards: &[usize]) {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < cards[k] {
            return;
        }
        idx[k] = 0;
    }
}
