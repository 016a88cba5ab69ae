//! Simply interacting pairs: a pair of distinct support frequencies whose sum
//! leaves the support and is reachable from no other distinct pair. Such a
//! pair's convective output has no partner to cancel against, so it must
//! vanish on its own for the field to be stationary.

use super::GeometryError;
use crate::rat::Frequency;
use std::collections::BTreeSet;

/// Exact test: `n1 + n2` is outside `support` and the only unordered pair of
/// distinct members summing to it is `{n1, n2}`. A doubled member `m + m`
/// hitting the same sum does not disqualify the pair (its contribution
/// vanishes by incompressibility).
pub fn is_sip(
    support: &BTreeSet<Frequency>,
    n1: &Frequency,
    n2: &Frequency,
) -> Result<bool, GeometryError> {
    if n1 == n2 {
        return Err(GeometryError::IdenticalPair);
    }
    for n in [n1, n2] {
        if !support.contains(n) {
            return Err(GeometryError::NotInSupport(n.clone()));
        }
    }
    let sum = n1.add(n2);
    if support.contains(&sum) {
        return Ok(false);
    }
    for a in support {
        let b = sum.sub(a);
        if &b == a || !support.contains(&b) {
            continue;
        }
        if !((a == n1 && &b == n2) || (a == n2 && &b == n1)) {
            return Ok(false);
        }
    }
    Ok(true)
}
