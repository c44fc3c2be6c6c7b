use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::identity::{check_char, IdentityPair, PairSet};
use crate::lexicon::{self, COMPOUND_SURNAMES, REGION_CODES};
use crate::seed;

const BIRTH_YEARS: std::ops::RangeInclusive<u32> = 1950..=2005;

fn days_in_month(year: u32, month: u32) -> u32 {
    match month {
        2 if (year.is_multiple_of(4) && !year.is_multiple_of(100)) || year.is_multiple_of(400) => {
            29
        }
        2 => 28,
        4 | 6 | 9 | 11 => 30,
        _ => 31,
    }
}

pub(crate) fn random_name<R: Rng>(rng: &mut R) -> String {
    let mut name = String::new();
    // roughly 3% compound surnames
    if rng.gen_ratio(3, 100) {
        name.push_str(COMPOUND_SURNAMES.choose(rng).unwrap());
    } else {
        name.push(*lexicon::single_surnames().choose(rng).unwrap());
    }
    let given = if rng.gen_ratio(2, 3) { 2 } else { 1 };
    for _ in 0..given {
        name.push(*lexicon::given_chars().choose(rng).unwrap());
    }
    name
}

pub(crate) fn random_id<R: Rng>(rng: &mut R) -> String {
    let region = REGION_CODES.choose(rng).unwrap();
    let year = rng.gen_range(BIRTH_YEARS);
    let month = rng.gen_range(1..=12);
    let day = rng.gen_range(1..=days_in_month(year, month));
    let sequence = rng.gen_range(1..=999);
    let body = format!("{region}{year:04}{month:02}{day:02}{sequence:03}");
    let check = check_char(&body).expect("body is 17 digits");
    format!("{body}{check}")
}

/// Generates `n` pairs with distinct ID numbers. Deterministic under `seed`.
pub fn generate_identities(seed: u64, n: usize) -> PairSet {
    let mut rng = seed::rng(seed, "identities", n as u64);
    let mut seen = HashSet::with_capacity(n);
    let mut pairs = Vec::with_capacity(n);
    while pairs.len() < n {
        let id = random_id(&mut rng);
        if !seen.insert(id.clone()) {
            continue;
        }
        pairs.push(IdentityPair::new(random_name(&mut rng), id));
    }
    PairSet::new(String::new(), pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identity::validate_id;

    #[test]
    fn one_valid_pair() {
        let set = generate_identities(1, 1);
        assert_eq!(set.len(), 1);
        assert!(validate_id(&set.pairs[0].id_number));
    }

    #[test]
    fn deterministic() {
        assert_eq!(generate_identities(1, 30), generate_identities(1, 30));
        assert_ne!(generate_identities(1, 30), generate_identities(2, 30));
    }

    #[test]
    fn ten_thousand_distinct_valid() {
        let set = generate_identities(2, 10_000);
        let distinct: HashSet<_> = set.id_numbers().collect();
        assert_eq!(distinct.len(), 10_000);
        assert!(set.id_numbers().all(validate_id));
    }

    #[test]
    fn segments_are_plausible() {
        for p in generate_identities(9, 500).pairs {
            let id = p.id_number.as_str();
            assert!(REGION_CODES.contains(&&id[..6]));
            let year: u32 = id[6..10].parse().unwrap();
            let month: u32 = id[10..12].parse().unwrap();
            let day: u32 = id[12..14].parse().unwrap();
            assert!(BIRTH_YEARS.contains(&year));
            assert!((1..=12).contains(&month));
            assert!(day >= 1 && day <= days_in_month(year, month));
            assert!(lexicon::looks_like_name(&p.name), "{}", p.name);
        }
    }
}
