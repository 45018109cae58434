//! Gig-listing corpus: data model, JSON Lines ingestion, holdout filtering,
//! coverage estimation, and invariant validation.
//!
//! A corpus file is JSON Lines with one gig or seller record per line,
//! discriminated by a `"kind"` field. Labels live in a sidecar file
//! (`{"gig_id":N,"label":...,"type":...}` per line) so the same corpus serves
//! labeled training and wild-detection workflows. A corpus is immutable after
//! load and safe to share across threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The 12 top-level marketplace categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TopCategory {
    Advertising,
    Business,
    #[serde(rename = "Fun&Bizarre")]
    FunBizarre,
    Gifts,
    #[serde(rename = "Graphics&Design")]
    GraphicsDesign,
    Lifestyle,
    #[serde(rename = "Music&Audio")]
    MusicAudio,
    OnlineMarketing,
    Other,
    Programming,
    #[serde(rename = "Video&Animation")]
    VideoAnimation,
    #[serde(rename = "Writing&Translation")]
    WritingTranslation,
}

impl TopCategory {
    pub const ALL: [TopCategory; 12] = [
        TopCategory::Advertising,
        TopCategory::Business,
        TopCategory::FunBizarre,
        TopCategory::Gifts,
        TopCategory::GraphicsDesign,
        TopCategory::Lifestyle,
        TopCategory::MusicAudio,
        TopCategory::OnlineMarketing,
        TopCategory::Other,
        TopCategory::Programming,
        TopCategory::VideoAnimation,
        TopCategory::WritingTranslation,
    ];

    /// Position in the fixed category order (used for one-hot encoding).
    pub fn index(self) -> usize {
        Self::ALL.iter().position(|c| *c == self).expect("listed")
    }
}

/// Marketplace promotion tier of a seller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SellerLevel {
    None,
    Level1,
    Level2,
    TopRated,
}

impl SellerLevel {
    /// Ordinal code (promotion ladder position).
    pub fn code(self) -> u8 {
        match self {
            SellerLevel::None => 0,
            SellerLevel::Level1 => 1,
            SellerLevel::Level2 => 2,
            SellerLevel::TopRated => 3,
        }
    }
}

/// Binary gig label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Legitimate,
    Crowdturfing,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Legitimate => write!(f, "legitimate"),
            Label::Crowdturfing => write!(f, "crowdturfing"),
        }
    }
}

/// The three crowdturfing gig groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CrowdturfType {
    #[serde(rename = "social")]
    SocialMedia,
    #[serde(rename = "search")]
    SearchEngine,
    #[serde(rename = "traffic")]
    UserTraffic,
}

impl CrowdturfType {
    /// Fixed class order used by the one-vs-rest classifier and tie breaks.
    pub const ALL: [CrowdturfType; 3] = [
        CrowdturfType::SocialMedia,
        CrowdturfType::SearchEngine,
        CrowdturfType::UserTraffic,
    ];

    pub fn index(self) -> usize {
        match self {
            CrowdturfType::SocialMedia => 0,
            CrowdturfType::SearchEngine => 1,
            CrowdturfType::UserTraffic => 2,
        }
    }
}

impl fmt::Display for CrowdturfType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrowdturfType::SocialMedia => write!(f, "social"),
            CrowdturfType::SearchEngine => write!(f, "search"),
            CrowdturfType::UserTraffic => write!(f, "traffic"),
        }
    }
}

/// Per-country purchase counts for one gig.
///
/// Zero-count entries are dropped at construction, so `total` always equals
/// the sum of the stored counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuyerDistribution {
    counts: BTreeMap<String, u64>,
    total: u64,
}

impl BuyerDistribution {
    pub fn new(counts: impl IntoIterator<Item = (String, u64)>) -> Self {
        let counts: BTreeMap<String, u64> = counts.into_iter().filter(|(_, n)| *n > 0).collect();
        let total = counts.values().sum();
        BuyerDistribution { counts, total }
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct buyer countries.
    pub fn distinct_countries(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

impl Serialize for BuyerDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.counts.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BuyerDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let counts = BTreeMap::<String, u64>::deserialize(d)?;
        Ok(BuyerDistribution::new(counts))
    }
}

/// A marketplace task listing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GigListing {
    pub gig_id: u64,
    pub title: String,
    pub description: String,
    pub top_category: TopCategory,
    pub sub_category: String,
    pub rating_percent: u8,
    pub vote_count: u64,
    pub gig_longevity_days: u32,
    pub sold_count: u64,
    pub base_price_usd: f64,
    pub seller_id: String,
    pub creation_year: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub buyers: Option<BuyerDistribution>,
}

/// A seller profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SellerProfile {
    pub seller_id: String,
    pub username: String,
    pub country: String,
    pub seller_level: SellerLevel,
    pub seller_longevity_days: u32,
    pub response_time_hours: f64,
}

/// Label plus optional crowdturfing type for one gig.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GigLabel {
    pub label: Label,
    #[serde(rename = "type")]
    pub kind: Option<CrowdturfType>,
}

#[derive(Serialize, Deserialize)]
struct LabelRecord {
    gig_id: u64,
    label: Label,
    #[serde(rename = "type")]
    kind: Option<CrowdturfType>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Record {
    Gig(GigListing),
    Seller(SellerProfile),
}

/// A loaded corpus: gigs, their sellers, and an optional label sidecar.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub gigs: Vec<GigListing>,
    pub sellers: BTreeMap<String, SellerProfile>,
    pub labels: Option<BTreeMap<u64, GigLabel>>,
}

impl Corpus {
    /// Assemble a corpus, enforcing id uniqueness and seller resolution.
    ///
    /// In non-strict mode a dangling seller reference is repaired by
    /// synthesizing an `unknown` seller; the count of repairs is reported by
    /// [`load_corpus`].
    pub fn build(
        gigs: Vec<GigListing>,
        sellers: Vec<SellerProfile>,
        strict: bool,
    ) -> Result<(Corpus, usize)> {
        let mut seller_map = BTreeMap::new();
        for s in sellers {
            let id = s.seller_id.clone();
            if seller_map.insert(id.clone(), s).is_some() {
                return Err(Error::DuplicateSellerId(id));
            }
        }
        let mut seen = BTreeSet::new();
        let mut synthesized = 0usize;
        for g in &gigs {
            if !seen.insert(g.gig_id) {
                return Err(Error::DuplicateGigId(g.gig_id));
            }
            if !seller_map.contains_key(&g.seller_id) {
                if strict {
                    return Err(Error::DanglingSeller {
                        gig_id: g.gig_id,
                        seller_id: g.seller_id.clone(),
                    });
                }
                seller_map.insert(g.seller_id.clone(), synthesize_seller(&g.seller_id));
                synthesized += 1;
            }
        }
        Ok((
            Corpus {
                gigs,
                sellers: seller_map,
                labels: None,
            },
            synthesized,
        ))
    }

    /// Attach a label sidecar; every key must resolve to a gig.
    pub fn with_labels(mut self, labels: BTreeMap<u64, GigLabel>) -> Result<Corpus> {
        let ids: BTreeSet<u64> = self.gigs.iter().map(|g| g.gig_id).collect();
        for id in labels.keys() {
            if !ids.contains(id) {
                return Err(Error::UnknownGigId(*id));
            }
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn seller_of(&self, gig: &GigListing) -> Option<&SellerProfile> {
        self.sellers.get(&gig.seller_id)
    }

    pub fn label_of(&self, gig_id: u64) -> Option<GigLabel> {
        self.labels.as_ref().and_then(|m| m.get(&gig_id)).copied()
    }

    pub fn len(&self) -> usize {
        self.gigs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gigs.is_empty()
    }

    /// A new corpus holding only the gigs at `indices`, with sellers pruned to
    /// the ones still referenced and labels restricted to surviving gigs.
    pub fn subset(&self, indices: &[usize]) -> Corpus {
        let gigs: Vec<GigListing> = indices.iter().map(|&i| self.gigs[i].clone()).collect();
        let referenced: BTreeSet<&str> = gigs.iter().map(|g| g.seller_id.as_str()).collect();
        let sellers = self
            .sellers
            .iter()
            .filter(|(id, _)| referenced.contains(id.as_str()))
            .map(|(id, s)| (id.clone(), s.clone()))
            .collect();
        let labels = self.labels.as_ref().map(|m| {
            let ids: BTreeSet<u64> = gigs.iter().map(|g| g.gig_id).collect();
            m.iter()
                .filter(|(id, _)| ids.contains(id))
                .map(|(id, l)| (*id, *l))
                .collect()
        });
        Corpus {
            gigs,
            sellers,
            labels,
        }
    }
}

fn synthesize_seller(seller_id: &str) -> SellerProfile {
    SellerProfile {
        seller_id: seller_id.to_owned(),
        username: "unknown".to_owned(),
        country: "unknown".to_owned(),
        seller_level: SellerLevel::None,
        seller_longevity_days: 0,
        response_time_hours: 0.0,
    }
}

/// Outcome of [`load_corpus`]: the corpus plus repair counters.
#[derive(Debug)]
pub struct LoadOutcome {
    pub corpus: Corpus,
    /// Malformed lines skipped (non-strict mode only).
    pub skipped_lines: usize,
    /// Sellers synthesized for dangling references (non-strict mode only).
    pub synthesized_sellers: usize,
}

/// Load a JSON Lines corpus file.
///
/// In strict mode the first malformed line aborts the load; otherwise
/// malformed lines are skipped and counted. Duplicate ids are an error in
/// both modes.
pub fn load_corpus(path: impl AsRef<Path>, strict: bool) -> Result<LoadOutcome> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    let mut gigs = Vec::new();
    let mut sellers = Vec::new();
    let mut skipped = 0usize;
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Record>(&line) {
            Ok(Record::Gig(g)) => gigs.push(g),
            Ok(Record::Seller(s)) => sellers.push(s),
            Err(e) => {
                if strict {
                    return Err(Error::MalformedRecord {
                        path: path.display().to_string(),
                        line: lineno + 1,
                        message: e.to_string(),
                    });
                }
                skipped += 1;
            }
        }
    }
    let (corpus, synthesized) = Corpus::build(gigs, sellers, strict)?;
    Ok(LoadOutcome {
        corpus,
        skipped_lines: skipped,
        synthesized_sellers: synthesized,
    })
}

/// Write a corpus as JSON Lines: sellers first, then gigs, both in stable order.
pub fn save_corpus(corpus: &Corpus, w: &mut impl Write) -> Result<()> {
    for seller in corpus.sellers.values() {
        serde_json::to_writer(&mut *w, &Record::Seller(seller.clone())).map_err(|e| {
            Error::MalformedRecord {
                path: String::new(),
                line: 0,
                message: e.to_string(),
            }
        })?;
        writeln!(w)?;
    }
    for gig in &corpus.gigs {
        serde_json::to_writer(&mut *w, &Record::Gig(gig.clone())).map_err(|e| {
            Error::MalformedRecord {
                path: String::new(),
                line: 0,
                message: e.to_string(),
            }
        })?;
        writeln!(w)?;
    }
    Ok(())
}

/// Load a label sidecar file (JSON Lines).
///
/// A crowdturfing type on a legitimate label violates the label invariant and
/// is treated as malformed.
pub fn load_labels(
    path: impl AsRef<Path>,
    strict: bool,
) -> Result<(BTreeMap<u64, GigLabel>, usize)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    let mut labels = BTreeMap::new();
    let mut skipped = 0usize;
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| Error::MalformedRecord {
            path: path.display().to_string(),
            line: lineno + 1,
            message,
        };
        match serde_json::from_str::<LabelRecord>(&line) {
            Ok(rec) => {
                if rec.label == Label::Legitimate && rec.kind.is_some() {
                    if strict {
                        return Err(malformed("crowdturfing type on a legitimate label".into()));
                    }
                    skipped += 1;
                    continue;
                }
                labels.insert(
                    rec.gig_id,
                    GigLabel {
                        label: rec.label,
                        kind: rec.kind,
                    },
                );
            }
            Err(e) => {
                if strict {
                    return Err(malformed(e.to_string()));
                }
                skipped += 1;
            }
        }
    }
    Ok((labels, skipped))
}

/// Write a label sidecar as JSON Lines in gig-id order.
pub fn save_labels(labels: &BTreeMap<u64, GigLabel>, w: &mut impl Write) -> Result<()> {
    for (gig_id, l) in labels {
        let rec = LabelRecord {
            gig_id: *gig_id,
            label: l.label,
            kind: l.kind,
        };
        serde_json::to_writer(&mut *w, &rec).map_err(|e| Error::MalformedRecord {
            path: String::new(),
            line: 0,
            message: e.to_string(),
        })?;
        writeln!(w)?;
    }
    Ok(())
}

/// Remove the labeled gigs and every other gig posted by their sellers.
///
/// This is the wild-detection holdout: gigs used for training must not leak
/// into the test corpus, nor may any gig by the same sellers.
pub fn holdout_filter(corpus: &Corpus, labeled_ids: &BTreeSet<u64>) -> Result<Corpus> {
    let ids: BTreeSet<u64> = corpus.gigs.iter().map(|g| g.gig_id).collect();
    for id in labeled_ids {
        if !ids.contains(id) {
            return Err(Error::UnknownGigId(*id));
        }
    }
    let excluded_sellers: BTreeSet<&str> = corpus
        .gigs
        .iter()
        .filter(|g| labeled_ids.contains(&g.gig_id))
        .map(|g| g.seller_id.as_str())
        .collect();
    let keep: Vec<usize> = corpus
        .gigs
        .iter()
        .enumerate()
        .filter(|(_, g)| {
            !labeled_ids.contains(&g.gig_id) && !excluded_sellers.contains(g.seller_id.as_str())
        })
        .map(|(i, _)| i)
        .collect();
    Ok(corpus.subset(&keep))
}

/// Fraction of known-active listings that a crawl captured.
///
/// `n_sampled` ids were probed, `n_active` of them were still live, and
/// `n_overlap` of the live ones appear in the crawl.
pub fn estimate_coverage(n_sampled: u64, n_active: u64, n_overlap: u64) -> Result<f64> {
    if n_active == 0 {
        return Err(Error::precondition("coverage undefined: no active gigs"));
    }
    if n_overlap > n_active || n_active > n_sampled {
        return Err(Error::precondition(format!(
            "expected overlap <= active <= sampled, got {n_overlap} / {n_active} / {n_sampled}"
        )));
    }
    Ok(n_overlap as f64 / n_active as f64)
}

/// One invariant violation found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ValidationIssue {
    DuplicateGigId {
        gig_id: u64,
    },
    RatingOutOfRange {
        gig_id: u64,
        rating_percent: u8,
    },
    SoldCountMismatch {
        gig_id: u64,
        sold_count: u64,
        buyer_total: u64,
    },
    CreationYearInFuture {
        gig_id: u64,
        creation_year: i32,
    },
    NonPositivePrice {
        gig_id: u64,
    },
    DanglingSeller {
        gig_id: u64,
        seller_id: String,
    },
    BadCountryCode {
        seller_id: String,
        country: String,
    },
    DanglingLabel {
        gig_id: u64,
    },
    TypeOnLegitimate {
        gig_id: u64,
    },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::DuplicateGigId { gig_id } => {
                write!(f, "gig {gig_id}: duplicate gig id")
            }
            ValidationIssue::RatingOutOfRange {
                gig_id,
                rating_percent,
            } => {
                write!(
                    f,
                    "gig {gig_id}: rating_percent {rating_percent} outside 0..=100"
                )
            }
            ValidationIssue::SoldCountMismatch {
                gig_id,
                sold_count,
                buyer_total,
            } => write!(
                f,
                "gig {gig_id}: sold_count {sold_count} != buyer total {buyer_total}"
            ),
            ValidationIssue::CreationYearInFuture {
                gig_id,
                creation_year,
            } => {
                write!(
                    f,
                    "gig {gig_id}: creation_year {creation_year} is in the future"
                )
            }
            ValidationIssue::NonPositivePrice { gig_id } => {
                write!(f, "gig {gig_id}: base_price_usd must be positive")
            }
            ValidationIssue::DanglingSeller { gig_id, seller_id } => {
                write!(f, "gig {gig_id}: unknown seller {seller_id:?}")
            }
            ValidationIssue::BadCountryCode { seller_id, country } => {
                write!(f, "seller {seller_id:?}: bad country code {country:?}")
            }
            ValidationIssue::DanglingLabel { gig_id } => {
                write!(f, "label for unknown gig {gig_id}")
            }
            ValidationIssue::TypeOnLegitimate { gig_id } => {
                write!(
                    f,
                    "gig {gig_id}: crowdturfing type attached to a legitimate label"
                )
            }
        }
    }
}

/// Report produced by [`validate`]; empty iff all type invariants hold.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Check every type invariant and report violations (never fails).
pub fn validate(corpus: &Corpus) -> ValidationReport {
    use chrono::Datelike;
    validate_as_of(corpus, chrono::Utc::now().year())
}

/// [`validate`] with an explicit "current year" for reproducible checks.
pub fn validate_as_of(corpus: &Corpus, current_year: i32) -> ValidationReport {
    let mut issues = Vec::new();
    let mut seen = BTreeSet::new();
    for gig in &corpus.gigs {
        if !seen.insert(gig.gig_id) {
            issues.push(ValidationIssue::DuplicateGigId { gig_id: gig.gig_id });
        }
        if gig.rating_percent > 100 {
            issues.push(ValidationIssue::RatingOutOfRange {
                gig_id: gig.gig_id,
                rating_percent: gig.rating_percent,
            });
        }
        if let Some(buyers) = &gig.buyers {
            if gig.sold_count != buyers.total() {
                issues.push(ValidationIssue::SoldCountMismatch {
                    gig_id: gig.gig_id,
                    sold_count: gig.sold_count,
                    buyer_total: buyers.total(),
                });
            }
        }
        if gig.creation_year > current_year {
            issues.push(ValidationIssue::CreationYearInFuture {
                gig_id: gig.gig_id,
                creation_year: gig.creation_year,
            });
        }
        if gig.base_price_usd.is_nan() || gig.base_price_usd <= 0.0 {
            issues.push(ValidationIssue::NonPositivePrice { gig_id: gig.gig_id });
        }
        if !corpus.sellers.contains_key(&gig.seller_id) {
            issues.push(ValidationIssue::DanglingSeller {
                gig_id: gig.gig_id,
                seller_id: gig.seller_id.clone(),
            });
        }
    }
    for seller in corpus.sellers.values() {
        let c = seller.country.as_str();
        let well_formed =
            c == "unknown" || (c.len() == 2 && c.bytes().all(|b| b.is_ascii_uppercase()));
        if !well_formed {
            issues.push(ValidationIssue::BadCountryCode {
                seller_id: seller.seller_id.clone(),
                country: seller.country.clone(),
            });
        }
    }
    if let Some(labels) = &corpus.labels {
        let ids: BTreeSet<u64> = corpus.gigs.iter().map(|g| g.gig_id).collect();
        for (gig_id, label) in labels {
            if !ids.contains(gig_id) {
                issues.push(ValidationIssue::DanglingLabel { gig_id: *gig_id });
            }
            if label.label == Label::Legitimate && label.kind.is_some() {
                issues.push(ValidationIssue::TypeOnLegitimate { gig_id: *gig_id });
            }
        }
    }
    ValidationReport { issues }
}

#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;

    pub(crate) fn gig(id: u64, seller: &str) -> GigListing {
        GigListing {
            gig_id: id,
            title: format!("I will do thing {id} for $5"),
            description: "a thing".to_owned(),
            top_category: TopCategory::OnlineMarketing,
            sub_category: "social marketing".to_owned(),
            rating_percent: 99,
            vote_count: 10,
            gig_longevity_days: 30,
            sold_count: 0,
            base_price_usd: 5.0,
            seller_id: seller.to_owned(),
            creation_year: 2013,
            buyers: None,
        }
    }

    pub(crate) fn seller(id: &str) -> SellerProfile {
        SellerProfile {
            seller_id: id.to_owned(),
            username: id.to_owned(),
            country: "US".to_owned(),
            seller_level: SellerLevel::TopRated,
            seller_longevity_days: 400,
            response_time_hours: 2.5,
        }
    }

    pub(crate) fn gig_with_year(id: u64, year: i32) -> GigListing {
        let mut g = gig(id, "s");
        g.creation_year = year;
        g
    }
}
