//! Community belonging and engagement measures.

use alloc::collections::BTreeSet;

use super::tables::{CountryTable, GenderSide, GenderTable};
use crate::record::UserProfile;

/// A distinct participant identified by login.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Participant<'a> {
    pub login: &'a str,
    pub display_name: Option<&'a str>,
}

/// Which side forms the numerator of the gender ratio.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum GenderRatioMode {
    #[default]
    FemaleShare,
    MaleShare,
}

/// `female / (female + male)` over distinct logins (or the male share, per
/// `mode`). Unknown names are excluded; `None` when nobody is categorized.
pub fn gender_ratio(participants: &[Participant<'_>], table: &GenderTable, mode: GenderRatioMode) -> Option<f64> {
    let mut seen = BTreeSet::new();
    let (mut female, mut male) = (0u64, 0u64);
    for p in participants {
        if !seen.insert(p.login) {
            continue;
        }
        let side = p.display_name.map_or(GenderSide::Unknown, |n| table.lookup(n).side());
        match side {
            GenderSide::Female => female += 1,
            GenderSide::Male => male += 1,
            GenderSide::Unknown => {}
        }
    }
    let denom = female + male;
    if denom == 0 {
        return None;
    }
    let num = match mode {
        GenderRatioMode::FemaleShare => female,
        GenderRatioMode::MaleShare => male,
    };
    Some(num as f64 / denom as f64)
}

/// Number of distinct countries resolved from the profiles' locations.
pub fn location_coverage<'a>(profiles: impl IntoIterator<Item = &'a UserProfile>, table: &CountryTable) -> usize {
    profiles
        .into_iter()
        .filter_map(|p| p.location_raw.as_deref())
        .filter_map(|loc| table.resolve(loc))
        .collect::<BTreeSet<_>>()
        .len()
}
