//! Featurization: unigram tf-idf over gig text plus a dense metadata block,
//! and chi-square ranking of vocabulary terms.
//!
//! All operations here are pure given an immutable [`Vocabulary`]; vectorizing
//! a corpus in parallel per gig is safe and schedule-independent.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{BuyerDistribution, Corpus, GigListing, Label, SellerProfile};
use crate::error::{Error, Result};
use crate::stopwords::{self, StopwordSet};

/// Which text fields feed the bag-of-words block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextFields {
    None,
    Title,
    Description,
    Both,
}

impl TextFields {
    fn title(self) -> bool {
        matches!(self, TextFields::Title | TextFields::Both)
    }
    fn description(self) -> bool {
        matches!(self, TextFields::Description | TextFields::Both)
    }
}

/// Feature-engineering configuration.
///
/// The world-domination-rate denominator defaults to the number of distinct
/// buyer countries observed corpus-wide at vocabulary-build time; set
/// `wdr_denominator` to pin it explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub text_fields: TextFields,
    pub stopword_list: String,
    pub min_df: u32,
    pub wdr_denominator: Option<u32>,
    pub use_categories: bool,
    pub use_rating: bool,
    pub use_votes: bool,
    pub use_gig_longevity: bool,
    pub use_response_time: bool,
    pub use_seller_country: bool,
    pub use_seller_longevity: bool,
    pub use_seller_level: bool,
    pub use_world_domination_rate: bool,
    pub use_buyer_entropy: bool,
    pub use_buyer_std: bool,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        FeatureSpec {
            text_fields: TextFields::Both,
            stopword_list: "en-v1".to_owned(),
            min_df: 1,
            wdr_denominator: None,
            use_categories: true,
            use_rating: true,
            use_votes: true,
            use_gig_longevity: true,
            use_response_time: true,
            use_seller_country: true,
            use_seller_longevity: true,
            use_seller_level: true,
            use_world_domination_rate: true,
            use_buyer_entropy: true,
            use_buyer_std: true,
        }
    }
}

impl FeatureSpec {
    /// True when neither text nor any metadata feature is enabled.
    pub fn is_vacuous(&self) -> bool {
        self.text_fields == TextFields::None && self.dense_width() == 0
    }

    /// Width of the dense metadata block under this spec.
    pub fn dense_width(&self) -> usize {
        self.dense_feature_names().len()
    }

    /// Names of the dense slots, in layout order.
    pub fn dense_feature_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        if self.use_rating {
            names.push("rating".to_owned());
        }
        if self.use_votes {
            names.push("votes".to_owned());
        }
        if self.use_gig_longevity {
            names.push("gig_longevity".to_owned());
        }
        if self.use_response_time {
            names.push("response_time".to_owned());
        }
        if self.use_seller_longevity {
            names.push("seller_longevity".to_owned());
        }
        if self.use_seller_level {
            names.push("seller_level".to_owned());
        }
        if self.use_categories {
            for cat in crate::corpus::TopCategory::ALL {
                names.push(format!("cat_{}", format!("{cat:?}").to_lowercase()));
            }
            names.push("sub_category".to_owned());
        }
        if self.use_seller_country {
            names.push("seller_country".to_owned());
        }
        if self.use_world_domination_rate {
            names.push("world_domination_rate".to_owned());
        }
        if self.use_buyer_entropy {
            names.push("buyer_entropy_bits".to_owned());
        }
        if self.use_buyer_std {
            names.push("buyer_count_std".to_owned());
        }
        names
    }

    /// Stable hash of the spec, recorded in vocabularies and exports.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("spec serializes");
        hex_digest(canonical.as_bytes())
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Lowercase, split on every non-alphanumeric character, drop empties and
/// stop-list members. Digits are retained.
pub fn tokenize(text: &str, stopwords: &StopwordSet) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty() && !stopwords.contains(t))
        .map(str::to_owned)
        .collect()
}

/// Term index over a corpus, with the frozen categorical code tables the
/// dense block needs. Built once from training data; the fingerprint ties
/// vectors and models back to the exact vocabulary that produced them.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, u32>,
    df: Vec<u32>,
    n_documents: u32,
    sub_category_codes: BTreeMap<String, u32>,
    country_codes: BTreeMap<String, u32>,
    wdr_denominator: u32,
    spec_hash: String,
    fingerprint: String,
}

/// Code reserved for categorical values unseen at build time.
pub const UNKNOWN_CODE: u32 = 0;

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term_index(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn df(&self, index: u32) -> u32 {
        self.df[index as usize]
    }

    pub fn n_documents(&self) -> u32 {
        self.n_documents
    }

    /// Smoothed inverse document frequency: `ln((1+N)/(1+df)) + 1`.
    pub fn idf(&self, index: u32) -> f64 {
        let n = self.n_documents as f64;
        let df = self.df[index as usize] as f64;
        ((1.0 + n) / (1.0 + df)).ln() + 1.0
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn spec_hash(&self) -> &str {
        &self.spec_hash
    }

    pub fn wdr_denominator(&self) -> u32 {
        self.wdr_denominator
    }

    fn sub_category_code(&self, value: &str) -> u32 {
        self.sub_category_codes
            .get(value)
            .copied()
            .unwrap_or(UNKNOWN_CODE)
    }

    fn country_code(&self, value: &str) -> u32 {
        self.country_codes
            .get(value)
            .copied()
            .unwrap_or(UNKNOWN_CODE)
    }

    fn check_spec(&self, spec: &FeatureSpec) -> Result<()> {
        let found = spec.hash();
        if found != self.spec_hash {
            return Err(Error::FingerprintMismatch {
                expected: self.spec_hash.clone(),
                found,
            });
        }
        Ok(())
    }
}

fn document_tokens(gig: &GigListing, spec: &FeatureSpec, stop: &StopwordSet) -> Vec<String> {
    let mut tokens = Vec::new();
    if spec.text_fields.title() {
        tokens.extend(tokenize(&gig.title, stop));
    }
    if spec.text_fields.description() {
        tokens.extend(tokenize(&gig.description, stop));
    }
    tokens
}

/// Build the vocabulary and categorical code tables from a corpus.
///
/// Terms are indexed in lexicographic order; only terms with document
/// frequency >= `min_df` are kept. With text disabled the term list is
/// intentionally empty (metadata-only pipelines); with text enabled an empty
/// result is an error.
pub fn build_vocabulary(corpus: &Corpus, spec: &FeatureSpec) -> Result<Vocabulary> {
    if corpus.is_empty() {
        return Err(Error::precondition(
            "cannot build a vocabulary from an empty corpus",
        ));
    }
    if spec.is_vacuous() {
        return Err(Error::precondition(
            "feature spec enables neither text nor metadata features",
        ));
    }
    let stop = stopwords::by_id(&spec.stopword_list)?;

    let mut df_map: BTreeMap<String, u32> = BTreeMap::new();
    if spec.text_fields != TextFields::None {
        for gig in &corpus.gigs {
            let distinct: BTreeSet<String> =
                document_tokens(gig, spec, &stop).into_iter().collect();
            for term in distinct {
                *df_map.entry(term).or_insert(0) += 1;
            }
        }
    }
    let mut terms = Vec::new();
    let mut df = Vec::new();
    for (term, count) in df_map {
        if count >= spec.min_df {
            terms.push(term);
            df.push(count);
        }
    }
    if spec.text_fields != TextFields::None && terms.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let index = terms
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i as u32))
        .collect();

    // categorical code tables: observed values get 1.., 0 stays reserved
    let subs: BTreeSet<&str> = corpus
        .gigs
        .iter()
        .map(|g| g.sub_category.as_str())
        .collect();
    let sub_category_codes: BTreeMap<String, u32> = subs
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v.to_owned(), i as u32 + 1))
        .collect();
    let countries: BTreeSet<&str> = corpus
        .sellers
        .values()
        .map(|s| s.country.as_str())
        .collect();
    let country_codes: BTreeMap<String, u32> = countries
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v.to_owned(), i as u32 + 1))
        .collect();

    let buyer_countries: BTreeSet<&str> = corpus
        .gigs
        .iter()
        .filter_map(|g| g.buyers.as_ref())
        .flat_map(|b| b.counts().keys().map(String::as_str))
        .collect();
    let wdr_denominator = spec
        .wdr_denominator
        .unwrap_or_else(|| (buyer_countries.len() as u32).max(1));

    let spec_hash = spec.hash();
    let n_documents = corpus.gigs.len() as u32;
    let fingerprint = compute_fingerprint(
        &spec_hash,
        n_documents,
        wdr_denominator,
        &terms,
        &df,
        &sub_category_codes,
        &country_codes,
    );

    Ok(Vocabulary {
        terms,
        index,
        df,
        n_documents,
        sub_category_codes,
        country_codes,
        wdr_denominator,
        spec_hash,
        fingerprint,
    })
}

fn compute_fingerprint(
    spec_hash: &str,
    n_documents: u32,
    wdr_denominator: u32,
    terms: &[String],
    df: &[u32],
    sub_category_codes: &BTreeMap<String, u32>,
    country_codes: &BTreeMap<String, u32>,
) -> String {
    let mut h = Sha256::new();
    h.update(spec_hash.as_bytes());
    h.update([0u8]);
    h.update(u64::from(n_documents).to_le_bytes());
    h.update(wdr_denominator.to_le_bytes());
    for (t, d) in terms.iter().zip(df) {
        h.update(t.as_bytes());
        h.update([0u8]);
        h.update(d.to_le_bytes());
    }
    for (v, c) in sub_category_codes {
        h.update(v.as_bytes());
        h.update(c.to_le_bytes());
    }
    for (v, c) in country_codes {
        h.update(v.as_bytes());
        h.update(c.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Serialize a vocabulary to its versioned text form (`CGDV v1` header).
pub fn encode_vocabulary(vocab: &Vocabulary) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    writeln!(out, "CGDV v1 {}", vocab.fingerprint).expect("string");
    writeln!(out, "spec {}", vocab.spec_hash).expect("string");
    writeln!(out, "docs {}", vocab.n_documents).expect("string");
    writeln!(out, "wdr {}", vocab.wdr_denominator).expect("string");
    writeln!(out, "terms {}", vocab.terms.len()).expect("string");
    for (t, d) in vocab.terms.iter().zip(&vocab.df) {
        writeln!(out, "term {t} {d}").expect("string");
    }
    writeln!(out, "subs {}", vocab.sub_category_codes.len()).expect("string");
    for (v, c) in &vocab.sub_category_codes {
        writeln!(out, "sub {c} {v}").expect("string");
    }
    writeln!(out, "countries {}", vocab.country_codes.len()).expect("string");
    for (v, c) in &vocab.country_codes {
        writeln!(out, "country {c} {v}").expect("string");
    }
    out
}

/// Parse [`encode_vocabulary`] output. The fingerprint in the header is
/// recomputed from the content and must match.
pub fn decode_vocabulary(text: &str) -> Result<Vocabulary> {
    let fail = |msg: String| Error::ModelFormat(msg);
    let mut lines = text.lines();
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| fail(format!("vocabulary file truncated before {what}")))
    };
    let header = next("header")?;
    let fingerprint = header
        .strip_prefix("CGDV v1 ")
        .ok_or_else(|| fail(format!("bad vocabulary header {header:?}")))?
        .to_owned();
    let field = |line: &str, key: &str| -> Result<String> {
        line.strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .map(str::to_owned)
            .ok_or_else(|| fail(format!("expected {key:?} line, found {line:?}")))
    };
    let spec_hash = field(next("spec")?, "spec")?;
    let n_documents: u32 = field(next("docs")?, "docs")?
        .parse()
        .map_err(|_| fail("bad docs count".into()))?;
    let wdr_denominator: u32 = field(next("wdr")?, "wdr")?
        .parse()
        .map_err(|_| fail("bad wdr denominator".into()))?;

    let n_terms: usize = field(next("terms")?, "terms")?
        .parse()
        .map_err(|_| fail("bad term count".into()))?;
    let mut terms = Vec::with_capacity(n_terms);
    let mut df = Vec::with_capacity(n_terms);
    for _ in 0..n_terms {
        let rest = field(next("term")?, "term")?;
        let (t, d) = rest
            .rsplit_once(' ')
            .ok_or_else(|| fail("bad term line".into()))?;
        terms.push(t.to_owned());
        df.push(d.parse().map_err(|_| fail("bad term df".into()))?);
    }
    let n_subs: usize = field(next("subs")?, "subs")?
        .parse()
        .map_err(|_| fail("bad sub count".into()))?;
    let mut sub_category_codes = BTreeMap::new();
    for _ in 0..n_subs {
        let rest = field(next("sub")?, "sub")?;
        let (c, v) = rest
            .split_once(' ')
            .ok_or_else(|| fail("bad sub line".into()))?;
        sub_category_codes.insert(
            v.to_owned(),
            c.parse().map_err(|_| fail("bad sub code".into()))?,
        );
    }
    let n_countries: usize = field(next("countries")?, "countries")?
        .parse()
        .map_err(|_| fail("bad country count".into()))?;
    let mut country_codes = BTreeMap::new();
    for _ in 0..n_countries {
        let rest = field(next("country")?, "country")?;
        let (c, v) = rest
            .split_once(' ')
            .ok_or_else(|| fail("bad country line".into()))?;
        country_codes.insert(
            v.to_owned(),
            c.parse().map_err(|_| fail("bad country code".into()))?,
        );
    }

    let recomputed = compute_fingerprint(
        &spec_hash,
        n_documents,
        wdr_denominator,
        &terms,
        &df,
        &sub_category_codes,
        &country_codes,
    );
    if recomputed != fingerprint {
        return Err(Error::FingerprintMismatch {
            expected: fingerprint,
            found: recomputed,
        });
    }
    let index = terms
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i as u32))
        .collect();
    Ok(Vocabulary {
        terms,
        index,
        df,
        n_documents,
        sub_category_codes,
        country_codes,
        wdr_denominator,
        spec_hash,
        fingerprint,
    })
}

/// Write a vocabulary file atomically.
pub fn save_vocabulary(vocab: &Vocabulary, path: impl AsRef<std::path::Path>) -> Result<()> {
    crate::util::write_atomic(path.as_ref(), encode_vocabulary(vocab).as_bytes())
}

/// Read back a vocabulary file, verifying its fingerprint.
pub fn load_vocabulary(path: impl AsRef<std::path::Path>) -> Result<Vocabulary> {
    decode_vocabulary(&std::fs::read_to_string(path.as_ref())?)
}

/// A classifier-ready vector: sparse tf-idf text block plus dense metadata
/// block, stamped with the fingerprint of the vocabulary that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub fingerprint: String,
    /// `(vocabulary index, value)` pairs, indices strictly increasing.
    pub sparse: Vec<(u32, f64)>,
    pub dense: Vec<f64>,
}

impl FeatureVector {
    pub fn new(fingerprint: impl Into<String>, sparse: Vec<(u32, f64)>, dense: Vec<f64>) -> Self {
        FeatureVector {
            fingerprint: fingerprint.into(),
            sparse,
            dense,
        }
    }

    pub fn sparse_l2_norm(&self) -> f64 {
        self.sparse.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }
}

/// Shannon entropy (bits) of the normalized buyer-country distribution.
pub fn buyer_entropy(dist: &BuyerDistribution) -> f64 {
    let total = dist.total() as f64;
    if dist.is_empty() {
        return 0.0;
    }
    dist.counts()
        .values()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum()
}

/// Fraction of all countries that this gig's buyers come from.
pub fn world_domination_rate(dist: &BuyerDistribution, denominator: u32) -> Result<f64> {
    if denominator == 0 {
        return Err(Error::precondition("world-domination denominator is zero"));
    }
    let distinct = dist.distinct_countries() as u32;
    if distinct > denominator {
        return Err(Error::precondition(format!(
            "denominator {denominator} smaller than {distinct} observed countries"
        )));
    }
    Ok(distinct as f64 / denominator as f64)
}

/// Population standard deviation of per-country purchase counts; 0 with at
/// most one country.
pub fn buyer_count_std(dist: &BuyerDistribution) -> f64 {
    let n = dist.distinct_countries();
    if n <= 1 {
        return 0.0;
    }
    let mean = dist.total() as f64 / n as f64;
    let var = dist
        .counts()
        .values()
        .map(|&c| {
            let d = c as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / n as f64;
    var.sqrt()
}

/// tf-idf vectorization: raw term frequency times smoothed idf, then the
/// sparse block is L2-normalized. Out-of-vocabulary tokens are ignored.
pub fn vectorize(
    gig: &GigListing,
    seller: &SellerProfile,
    vocab: &Vocabulary,
    spec: &FeatureSpec,
) -> Result<FeatureVector> {
    vectorize_inner(gig, seller, vocab, spec, SparseWeighting::TfIdf)
}

/// Like [`vectorize`] but the sparse block carries raw term counts
/// (un-normalized) — the input the multinomial Naive Bayes baseline expects.
pub fn vectorize_counts(
    gig: &GigListing,
    seller: &SellerProfile,
    vocab: &Vocabulary,
    spec: &FeatureSpec,
) -> Result<FeatureVector> {
    vectorize_inner(gig, seller, vocab, spec, SparseWeighting::Counts)
}

enum SparseWeighting {
    TfIdf,
    Counts,
}

fn vectorize_inner(
    gig: &GigListing,
    seller: &SellerProfile,
    vocab: &Vocabulary,
    spec: &FeatureSpec,
    weighting: SparseWeighting,
) -> Result<FeatureVector> {
    vocab.check_spec(spec)?;
    let stop = stopwords::by_id(&spec.stopword_list)?;

    let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
    for token in document_tokens(gig, spec, &stop) {
        if let Some(idx) = vocab.term_index(&token) {
            *counts.entry(idx).or_insert(0.0) += 1.0;
        }
    }
    let mut sparse: Vec<(u32, f64)> = match weighting {
        SparseWeighting::TfIdf => counts
            .into_iter()
            .map(|(idx, tf)| (idx, tf * vocab.idf(idx)))
            .collect(),
        SparseWeighting::Counts => counts.into_iter().collect(),
    };
    if matches!(weighting, SparseWeighting::TfIdf) {
        let norm = sparse.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, v) in &mut sparse {
                *v /= norm;
            }
        }
    }

    let empty = BuyerDistribution::default();
    let buyers = gig.buyers.as_ref().unwrap_or(&empty);
    let mut dense = Vec::with_capacity(spec.dense_width());
    if spec.use_rating {
        dense.push(gig.rating_percent as f64);
    }
    if spec.use_votes {
        dense.push(gig.vote_count as f64);
    }
    if spec.use_gig_longevity {
        dense.push(gig.gig_longevity_days as f64);
    }
    if spec.use_response_time {
        dense.push(seller.response_time_hours);
    }
    if spec.use_seller_longevity {
        dense.push(seller.seller_longevity_days as f64);
    }
    if spec.use_seller_level {
        dense.push(seller.seller_level.code() as f64);
    }
    if spec.use_categories {
        let hot = gig.top_category.index();
        for i in 0..crate::corpus::TopCategory::ALL.len() {
            dense.push(if i == hot { 1.0 } else { 0.0 });
        }
        dense.push(vocab.sub_category_code(&gig.sub_category) as f64);
    }
    if spec.use_seller_country {
        dense.push(vocab.country_code(&seller.country) as f64);
    }
    if spec.use_world_domination_rate {
        // wild gigs can exceed the training-time denominator; clamp to 1.0
        let distinct = buyers.distinct_countries() as u32;
        let rate = if distinct > vocab.wdr_denominator() {
            1.0
        } else {
            world_domination_rate(buyers, vocab.wdr_denominator())?
        };
        dense.push(rate);
    }
    if spec.use_buyer_entropy {
        dense.push(buyer_entropy(buyers));
    }
    if spec.use_buyer_std {
        dense.push(buyer_count_std(buyers));
    }

    for (i, v) in dense.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteFeature {
                index: vocab.len() + i,
            });
        }
    }
    Ok(FeatureVector::new(
        vocab.fingerprint().to_owned(),
        sparse,
        dense,
    ))
}

/// Vectorize every gig of a corpus, in gig order.
pub fn vectorize_corpus(
    corpus: &Corpus,
    vocab: &Vocabulary,
    spec: &FeatureSpec,
) -> Result<Vec<FeatureVector>> {
    corpus
        .gigs
        .iter()
        .map(|gig| {
            let seller = corpus.seller_of(gig).ok_or_else(|| Error::DanglingSeller {
                gig_id: gig.gig_id,
                seller_id: gig.seller_id.clone(),
            })?;
            vectorize(gig, seller, vocab, spec)
        })
        .collect()
}

/// A term and its chi-square score against the binary label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermScore {
    pub term: String,
    pub chi2: f64,
}

/// Rank terms by the chi-square of their 2x2 presence/label contingency table.
///
/// `presence[doc][term]` marks whether the term occurs in the document. With
/// cell counts a (present, crowdturfing), b (present, legitimate), c (absent,
/// crowdturfing), d (absent, legitimate):
///
/// ```text
/// chi2 = N (ad - bc)^2 / ((a+b)(c+d)(a+c)(b+d))
/// ```
///
/// Degenerate margins (term in every document or none) score 0. Ties are
/// broken lexicographically by term.
pub fn chi_square_rank(
    presence: &[Vec<bool>],
    terms: &[String],
    labels: &[Label],
) -> Result<Vec<TermScore>> {
    if presence.is_empty() || presence.len() != labels.len() {
        return Err(Error::precondition(format!(
            "need matching non-empty presence ({}) and labels ({})",
            presence.len(),
            labels.len()
        )));
    }
    for row in presence {
        if row.len() != terms.len() {
            return Err(Error::precondition("presence row width != term count"));
        }
    }
    let n_pos = labels.iter().filter(|l| **l == Label::Crowdturfing).count();
    if n_pos == 0 || n_pos == labels.len() {
        return Err(Error::SingleClass);
    }

    let n = labels.len() as f64;
    let mut scores: Vec<TermScore> = terms
        .iter()
        .enumerate()
        .map(|(j, term)| {
            let mut a = 0f64; // present, crowdturfing
            let mut b = 0f64; // present, legitimate
            let mut c = 0f64; // absent, crowdturfing
            let mut d = 0f64; // absent, legitimate
            for (row, label) in presence.iter().zip(labels) {
                match (row[j], label) {
                    (true, Label::Crowdturfing) => a += 1.0,
                    (true, Label::Legitimate) => b += 1.0,
                    (false, Label::Crowdturfing) => c += 1.0,
                    (false, Label::Legitimate) => d += 1.0,
                }
            }
            let denom = (a + b) * (c + d) * (a + c) * (b + d);
            let chi2 = if denom == 0.0 {
                0.0
            } else {
                let det = a * d - b * c;
                n * det * det / denom
            };
            TermScore {
                term: term.clone(),
                chi2,
            }
        })
        .collect();
    scores.sort_by(|x, y| {
        y.chi2
            .partial_cmp(&x.chi2)
            .expect("chi2 is finite")
            .then_with(|| x.term.cmp(&y.term))
    });
    Ok(scores)
}

/// Per-document term-presence rows for a corpus under a vocabulary.
pub fn presence_matrix(
    corpus: &Corpus,
    vocab: &Vocabulary,
    spec: &FeatureSpec,
) -> Result<Vec<Vec<bool>>> {
    vocab.check_spec(spec)?;
    let stop = stopwords::by_id(&spec.stopword_list)?;
    Ok(corpus
        .gigs
        .iter()
        .map(|gig| {
            let mut row = vec![false; vocab.len()];
            for token in document_tokens(gig, spec, &stop) {
                if let Some(idx) = vocab.term_index(&token) {
                    row[idx as usize] = true;
                }
            }
            row
        })
        .collect())
}

/// Chi-square-rank the vocabulary of a labeled corpus.
pub fn rank_corpus_terms(
    corpus: &Corpus,
    vocab: &Vocabulary,
    spec: &FeatureSpec,
) -> Result<Vec<TermScore>> {
    let labels = corpus
        .gigs
        .iter()
        .map(|g| {
            corpus
                .label_of(g.gig_id)
                .map(|l| l.label)
                .ok_or(Error::UnlabeledGig(g.gig_id))
        })
        .collect::<Result<Vec<Label>>>()?;
    let presence = presence_matrix(corpus, vocab, spec)?;
    chi_square_rank(&presence, vocab.terms(), &labels)
}

/// Write the feature matrix in the stable diff-able text format:
/// a header with the vocabulary fingerprint and spec hash, then one line per
/// gig: `gig_id<TAB>index:value ...<TAB>dense values`.
pub fn export_matrix(
    w: &mut impl Write,
    vocab: &Vocabulary,
    spec: &FeatureSpec,
    rows: &[(u64, FeatureVector)],
) -> Result<()> {
    writeln!(w, "# vocab {} spec {}", vocab.fingerprint(), spec.hash())?;
    for (gig_id, v) in rows {
        let sparse = v
            .sparse
            .iter()
            .map(|(i, x)| format!("{i}:{x}"))
            .collect::<Vec<_>>()
            .join(" ");
        let dense = v
            .dense
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        writeln!(w, "{gig_id}\t{sparse}\t{dense}")?;
    }
    Ok(())
}

/// Write ranked terms as `term<TAB>chi2` lines.
pub fn export_term_scores(w: &mut impl Write, scores: &[TermScore]) -> Result<()> {
    for s in scores {
        writeln!(w, "{}\t{}", s.term, s.chi2)?;
    }
    Ok(())
}
