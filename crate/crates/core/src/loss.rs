//! Lower-bound financial loss estimation from matched titles and post views.
//!
//! The conversion assumption is fixed: one consumption per complete 100
//! views (floored, never rounded). Titles available on a streaming service
//! are grouped by (service, region) and each group is charged the service's
//! lowest monthly subscription; other titles are priced individually at the
//! rental price, falling back to the lowest physical price. Each consumption
//! is charged one subscription month; that interpretation is recorded in the
//! output metadata. Unpriceable groups land in a side ledger, never dropped.

use crate::platform::PostRecord;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::BufRead;
use thiserror::Error;

/// One consumption per this many views, floored.
pub const VIEWS_PER_CONSUMPTION: u64 = 100;

/// Sentinel region when no language tag is available.
pub const UNKNOWN_REGION: &str = "ZZ";

pub const METHOD_NOTES: &[&str] = &[
    "consumptions = floor(views / 100); flooring keeps the bound conservative",
    "streaming titles grouped by (service, region) at the service's lowest monthly cost",
    "one subscription month charged per consumption within a group",
    "non-streaming titles priced per title: rental first, else lowest physical",
    "raw post views are summed; reposts of a title are not deduplicated",
];

#[derive(Debug, Error)]
pub enum PricingError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("pricing line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("no exchange rate for currency {0}")]
pub struct MissingFxRate(pub String);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamingOffer {
    pub service_name: String,
    pub monthly_cost: f64,
    pub currency: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostAmount {
    pub cost: f64,
    pub currency: String,
}

/// Pricing for one title in one region. At least one access mode present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingEntry {
    pub title_id: String,
    pub region: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub streaming: Option<StreamingOffer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rental: Option<CostAmount>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical: Option<CostAmount>,
}

impl PricingEntry {
    fn validate(&self) -> Result<(), String> {
        if self.streaming.is_none() && self.rental.is_none() && self.physical.is_none() {
            return Err("entry has no access mode".into());
        }
        let costs = [
            self.streaming.as_ref().map(|s| s.monthly_cost),
            self.rental.as_ref().map(|c| c.cost),
            self.physical.as_ref().map(|c| c.cost),
        ];
        for c in costs.into_iter().flatten() {
            if !(c > 0.0) {
                return Err(format!("cost {c} must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PricingCatalog {
    entries: Vec<PricingEntry>,
    by_title_region: BTreeMap<(String, String), Vec<usize>>,
    /// Lowest monthly cost seen per (service, region), in native currency.
    service_floor: BTreeMap<(String, String), StreamingOffer>,
}

impl PricingCatalog {
    pub fn new(entries: Vec<PricingEntry>) -> Result<Self, PricingError> {
        let mut cat = PricingCatalog::default();
        for (i, e) in entries.iter().enumerate() {
            e.validate()
                .map_err(|message| PricingError::Parse { line: i + 1, message })?;
            cat.insert(e.clone());
        }
        Ok(cat)
    }

    pub fn from_reader(reader: impl BufRead) -> Result<Self, PricingError> {
        let mut cat = PricingCatalog::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let entry: PricingEntry =
                serde_json::from_str(trimmed).map_err(|e| PricingError::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            entry
                .validate()
                .map_err(|message| PricingError::Parse { line: i + 1, message })?;
            cat.insert(entry);
        }
        Ok(cat)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, PricingError> {
        Self::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    fn insert(&mut self, entry: PricingEntry) {
        let idx = self.entries.len();
        self.by_title_region
            .entry((entry.title_id.clone(), entry.region.clone()))
            .or_default()
            .push(idx);
        if let Some(offer) = &entry.streaming {
            let key = (offer.service_name.clone(), entry.region.clone());
            let current = self.service_floor.get(&key);
            // Cross-currency floors are resolved later in USD; within one
            // currency the lower native cost wins here.
            let replace = match current {
                None => true,
                Some(best) => {
                    offer.currency == best.currency && offer.monthly_cost < best.monthly_cost
                }
            };
            if replace {
                self.service_floor.insert(key, offer.clone());
            }
        }
        self.entries.push(entry);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[PricingEntry] {
        &self.entries
    }

    pub fn lookup(&self, title_id: &str, region: &str) -> Vec<&PricingEntry> {
        self.by_title_region
            .get(&(title_id.to_string(), region.to_string()))
            .map(|v| v.iter().map(|&i| &self.entries[i]).collect())
            .unwrap_or_default()
    }

    /// Lowest USD monthly cost for a service in a region across the whole
    /// catalog (the service's cheapest tier we have seen).
    pub fn service_lowest_usd(
        &self,
        service: &str,
        region: &str,
        fx: &ExchangeTable,
    ) -> Option<Result<f64, MissingFxRate>> {
        let mut best: Option<f64> = None;
        let mut missing: Option<MissingFxRate> = None;
        for e in &self.entries {
            let Some(offer) = &e.streaming else { continue };
            if offer.service_name != service || e.region != region {
                continue;
            }
            match fx.to_usd(offer.monthly_cost, &offer.currency) {
                Ok(usd) => best = Some(best.map_or(usd, |b: f64| b.min(usd))),
                Err(e) => missing = Some(e),
            }
        }
        match (best, missing) {
            (Some(b), _) => Some(Ok(b)),
            (None, Some(m)) => Some(Err(m)),
            (None, None) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeTable {
    /// USD per one unit of the keyed currency.
    pub rates: BTreeMap<String, f64>,
    pub as_of: String,
}

impl ExchangeTable {
    pub fn new(
        rates: impl IntoIterator<Item = (String, f64)>,
        as_of: impl Into<String>,
    ) -> Result<Self, String> {
        let mut map: BTreeMap<String, f64> = BTreeMap::new();
        for (k, v) in rates {
            map.insert(k.to_ascii_uppercase(), v);
        }
        match map.get("USD") {
            None => {
                map.insert("USD".into(), 1.0);
            }
            Some(r) if (*r - 1.0).abs() > 1e-12 => {
                return Err(format!("USD rate must be 1, got {r}"));
            }
            Some(_) => {}
        }
        for (k, v) in &map {
            if !(*v > 0.0) {
                return Err(format!("rate for {k} must be positive, got {v}"));
            }
        }
        Ok(ExchangeTable { rates: map, as_of: as_of.into() })
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        #[derive(Deserialize)]
        struct Raw {
            rates: BTreeMap<String, f64>,
            #[serde(default)]
            as_of: String,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| e.to_string())?;
        Self::new(raw.rates, raw.as_of)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, String> {
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| e.to_string())?)
    }

    pub fn to_usd(&self, amount: f64, currency: &str) -> Result<f64, MissingFxRate> {
        self.rates
            .get(&currency.to_ascii_uppercase())
            .map(|r| amount * r)
            .ok_or_else(|| MissingFxRate(currency.to_ascii_uppercase()))
    }
}

/// Static language → region table, shipped as a data file and overridable.
#[derive(Debug, Clone, PartialEq)]
pub struct LanguageMap {
    map: BTreeMap<String, String>,
}

impl LanguageMap {
    pub fn builtin() -> &'static LanguageMap {
        static MAP: std::sync::OnceLock<LanguageMap> = std::sync::OnceLock::new();
        MAP.get_or_init(|| {
            LanguageMap::from_json(include_str!("../data/language_regions.json"))
                .expect("builtin language map parses")
        })
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let raw: BTreeMap<String, String> =
            serde_json::from_str(text).map_err(|e| e.to_string())?;
        Ok(LanguageMap {
            map: raw
                .into_iter()
                .map(|(k, v)| (k.to_ascii_lowercase(), v.to_ascii_uppercase()))
                .collect(),
        })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, String> {
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| e.to_string())?)
    }

    pub fn region_of_tag(&self, tag: &str) -> String {
        let tag = tag.to_ascii_lowercase();
        if let Some(r) = self.map.get(&tag) {
            return r.clone();
        }
        // BCP-47-ish fallback: primary subtag only.
        let primary = tag.split(['-', '_']).next().unwrap_or("");
        self.map
            .get(primary)
            .cloned()
            .unwrap_or_else(|| UNKNOWN_REGION.to_string())
    }
}

/// Likely distribution region from the post's language tag; ZZ when absent
/// or unmapped.
pub fn infer_region(post: &PostRecord, map: &LanguageMap) -> String {
    match &post.language_tag {
        Some(tag) => map.region_of_tag(tag),
        None => UNKNOWN_REGION.to_string(),
    }
}

// ---------------------------------------------------------------------------
// Estimation.

/// A matched sighting: title, inferred region, raw views of the post.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchedView {
    pub title_id: String,
    pub region: String,
    pub views: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupKey {
    Streaming { service: String, region: String },
    Title { title_id: String, region: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberViews {
    pub title_id: String,
    pub views: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossGroup {
    pub key: GroupKey,
    pub members: Vec<MemberViews>,
    pub views_total: u64,
    pub consumptions: u64,
    pub unit_cost_usd: f64,
    pub loss_usd: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum UnpricedReason {
    NoPricing,
    MissingFxRate { currency: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnpricedGroup {
    pub key: GroupKey,
    pub views_total: u64,
    #[serde(flatten)]
    pub why: UnpricedReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossEstimate {
    pub groups: Vec<LossGroup>,
    pub unpriced: Vec<UnpricedGroup>,
    pub total_usd: f64,
    pub method_notes: Vec<String>,
}

pub fn consumptions(views: u64) -> u64 {
    views / VIEWS_PER_CONSUMPTION
}

/// Streaming grouping + per-title fallback over aggregated views.
pub fn estimate(
    matches: &[MatchedView],
    pricing: &PricingCatalog,
    fx: &ExchangeTable,
) -> LossEstimate {
    // Aggregate raw views per (title, region).
    let mut views: BTreeMap<(String, String), u64> = BTreeMap::new();
    for m in matches {
        *views.entry((m.title_id.clone(), m.region.clone())).or_insert(0) += m.views;
    }

    struct StreamGroup {
        members: Vec<MemberViews>,
        views_total: u64,
        unit_usd: f64,
    }
    let mut stream_groups: BTreeMap<(String, String), StreamGroup> = BTreeMap::new();
    let mut title_groups: Vec<LossGroup> = Vec::new();
    let mut unpriced: Vec<UnpricedGroup> = Vec::new();

    for ((title_id, region), v) in &views {
        let entries = pricing.lookup(title_id, region);
        if entries.is_empty() {
            unpriced.push(UnpricedGroup {
                key: GroupKey::Title { title_id: title_id.clone(), region: region.clone() },
                views_total: *v,
                why: UnpricedReason::NoPricing,
            });
            continue;
        }

        // Streaming wins when any offer exists. Among multiple carrying
        // services, the cheapest convertible one keeps the bound low.
        let mut services: Vec<&StreamingOffer> =
            entries.iter().filter_map(|e| e.streaming.as_ref()).collect();
        services.sort_by(|a, b| a.service_name.cmp(&b.service_name));
        services.dedup_by(|a, b| a.service_name == b.service_name);
        if !services.is_empty() {
            let mut best: Option<(f64, &str)> = None;
            let mut missing: Option<String> = None;
            for offer in &services {
                match pricing.service_lowest_usd(&offer.service_name, region, fx) {
                    Some(Ok(usd)) => {
                        if best.map_or(true, |(b, _)| usd < b) {
                            best = Some((usd, &offer.service_name));
                        }
                    }
                    Some(Err(MissingFxRate(c))) => missing = Some(c),
                    None => {}
                }
            }
            match best {
                Some((usd, service)) => {
                    let g = stream_groups
                        .entry((service.to_string(), region.clone()))
                        .or_insert_with(|| StreamGroup {
                            members: Vec::new(),
                            views_total: 0,
                            unit_usd: usd,
                        });
                    g.members
                        .push(MemberViews { title_id: title_id.clone(), views: *v });
                    g.views_total += *v;
                }
                None => {
                    let currency = missing.unwrap_or_else(|| "?".into());
                    unpriced.push(UnpricedGroup {
                        key: GroupKey::Title {
                            title_id: title_id.clone(),
                            region: region.clone(),
                        },
                        views_total: *v,
                        why: UnpricedReason::MissingFxRate { currency },
                    });
                }
            }
            continue;
        }

        // No streaming: rental first, else lowest physical.
        let price_of = |amounts: Vec<&CostAmount>| -> Option<Result<f64, String>> {
            if amounts.is_empty() {
                return None;
            }
            let mut best: Option<f64> = None;
            let mut missing: Option<String> = None;
            for a in amounts {
                match fx.to_usd(a.cost, &a.currency) {
                    Ok(usd) => best = Some(best.map_or(usd, |b: f64| b.min(usd))),
                    Err(MissingFxRate(c)) => missing = Some(c),
                }
            }
            Some(match best {
                Some(b) => Ok(b),
                None => Err(missing.expect("no best implies a missing rate")),
            })
        };
        let rentals: Vec<&CostAmount> = entries.iter().filter_map(|e| e.rental.as_ref()).collect();
        let physicals: Vec<&CostAmount> =
            entries.iter().filter_map(|e| e.physical.as_ref()).collect();
        let priced = price_of(rentals).or_else(|| price_of(physicals));
        match priced {
            Some(Ok(unit_usd)) => {
                let c = consumptions(*v);
                title_groups.push(LossGroup {
                    key: GroupKey::Title { title_id: title_id.clone(), region: region.clone() },
                    members: vec![MemberViews { title_id: title_id.clone(), views: *v }],
                    views_total: *v,
                    consumptions: c,
                    unit_cost_usd: unit_usd,
                    loss_usd: c as f64 * unit_usd,
                });
            }
            Some(Err(currency)) => unpriced.push(UnpricedGroup {
                key: GroupKey::Title { title_id: title_id.clone(), region: region.clone() },
                views_total: *v,
                why: UnpricedReason::MissingFxRate { currency },
            }),
            None => unreachable!("validated entries always carry a mode"),
        }
    }

    let mut groups: Vec<LossGroup> = stream_groups
        .into_iter()
        .map(|((service, region), g)| {
            let c = consumptions(g.views_total);
            LossGroup {
                key: GroupKey::Streaming { service, region },
                members: g.members,
                views_total: g.views_total,
                consumptions: c,
                unit_cost_usd: g.unit_usd,
                loss_usd: c as f64 * g.unit_usd,
            }
        })
        .collect();
    groups.extend(title_groups);
    groups.sort_by(|a, b| a.key.cmp(&b.key));
    unpriced.sort_by(|a, b| a.key.cmp(&b.key));

    LossEstimate {
        total_usd: groups.iter().map(|g| g.loss_usd).sum(),
        groups,
        unpriced,
        method_notes: METHOD_NOTES.iter().map(|s| s.to_string()).collect(),
    }
}

/// Table-style rollup: loss per (production country, title kind). Group
/// losses are attributed to member titles proportionally to views.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollupRow {
    pub country: String,
    pub kind: crate::catalog::TitleKind,
    pub views: u64,
    pub loss_usd: f64,
}

pub fn rollup(estimate: &LossEstimate, catalog: &crate::catalog::Catalog) -> Vec<RollupRow> {
    let mut acc: BTreeMap<(String, crate::catalog::TitleKind), (u64, f64)> = BTreeMap::new();
    for g in &estimate.groups {
        for m in &g.members {
            let share = if g.views_total == 0 {
                0.0
            } else {
                g.loss_usd * (m.views as f64 / g.views_total as f64)
            };
            let (country, kind) = match catalog.entry_by_id(&m.title_id) {
                Some(e) => (
                    e.countries.first().cloned().unwrap_or_else(|| "??".into()),
                    e.kind,
                ),
                None => ("??".to_string(), crate::catalog::TitleKind::Movie),
            };
            let slot = acc.entry((country, kind)).or_insert((0, 0.0));
            slot.0 += m.views;
            slot.1 += share;
        }
    }
    acc.into_iter()
        .map(|((country, kind), (views, loss_usd))| RollupRow { country, kind, views, loss_usd })
        .collect()
}

// ---------------------------------------------------------------------------
// Deterministic pricing fixture for simulator runs.

pub mod fixture {
    //! Pricing and FX fixtures derived from catalog entries. Pure functions
    //! of the inputs so repeated runs materialize identical artifacts.

    use super::*;
    use crate::catalog::CatalogEntry;

    pub const SERVICES: &[(&str, f64)] =
        &[("streamflix", 7.99), ("vidprime", 9.99), ("cinemaxa", 12.49)];

    pub fn region_currency(region: &str) -> &'static str {
        match region {
            "US" => "USD",
            "GB" => "GBP",
            "FR" | "DE" | "ES" | "IT" | "NL" | "PL" => "EUR",
            "IN" | "LK" => "INR",
            "KR" => "KRW",
            "JP" => "JPY",
            "BR" => "BRL",
            "RU" | "UA" => "RUB",
            "IR" => "IRR",
            "SA" | "PK" | "BD" => "SAR",
            _ => "USD",
        }
    }

    pub fn fx_table() -> ExchangeTable {
        ExchangeTable::new(
            [
                ("USD".to_string(), 1.0),
                ("EUR".to_string(), 1.08),
                ("GBP".to_string(), 1.27),
                ("INR".to_string(), 0.012),
                ("KRW".to_string(), 0.00075),
                ("JPY".to_string(), 0.0066),
                ("BRL".to_string(), 0.19),
                ("RUB".to_string(), 0.011),
                ("IRR".to_string(), 0.000024),
                ("SAR".to_string(), 0.27),
            ],
            "2026-01-31",
        )
        .expect("fixture fx table is valid")
    }

    fn cheap_hash(s: &str) -> u64 {
        s.bytes().fold(1469598103934665603u64, |h, b| {
            (h ^ b as u64).wrapping_mul(1099511628211)
        })
    }

    fn native(cost_usd: f64, currency: &str, fx: &ExchangeTable) -> f64 {
        let rate = fx.rates.get(currency).copied().unwrap_or(1.0);
        ((cost_usd / rate) * 100.0).round() / 100.0
    }

    /// One pricing line per (title, region). Mode keyed by a title hash:
    /// most titles stream, a stable minority is rental- or physical-only.
    pub fn pricing_for(entries: &[CatalogEntry], regions: &[String]) -> Vec<PricingEntry> {
        let fx = fx_table();
        let mut out = Vec::new();
        let mut seen_regions: Vec<String> = Vec::new();
        for r in regions {
            let r = r.to_ascii_uppercase();
            if !seen_regions.contains(&r) {
                seen_regions.push(r);
            }
        }
        for e in entries {
            let h = cheap_hash(&e.id);
            for region in &seen_regions {
                let currency = region_currency(region);
                let mode = h % 10;
                let mut entry = PricingEntry {
                    title_id: e.id.clone(),
                    region: region.clone(),
                    streaming: None,
                    rental: None,
                    physical: None,
                };
                match mode {
                    0 => {
                        entry.rental = Some(CostAmount {
                            cost: native(3.99, currency, &fx),
                            currency: currency.into(),
                        });
                    }
                    1 => {
                        entry.physical = Some(CostAmount {
                            cost: native(14.99, currency, &fx),
                            currency: currency.into(),
                        });
                    }
                    2 => {
                        entry.rental = Some(CostAmount {
                            cost: native(4.49, currency, &fx),
                            currency: currency.into(),
                        });
                        entry.physical = Some(CostAmount {
                            cost: native(12.99, currency, &fx),
                            currency: currency.into(),
                        });
                    }
                    _ => {
                        let (service, base) = SERVICES[(h % SERVICES.len() as u64) as usize];
                        entry.streaming = Some(StreamingOffer {
                            service_name: service.into(),
                            monthly_cost: native(base, currency, &fx),
                            currency: currency.into(),
                        });
                    }
                }
                out.push(entry);
            }
        }
        out
    }

    pub fn to_jsonl(entries: &[PricingEntry]) -> String {
        let mut out = String::new();
        for e in entries {
            out.push_str(&serde_json::to_string(e).expect("pricing serializes"));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn usd_fx() -> ExchangeTable {
        ExchangeTable::new([("USD".to_string(), 1.0)], "2026-01-31").unwrap()
    }

    fn rental_entry(title: &str, region: &str, cost: f64) -> PricingEntry {
        PricingEntry {
            title_id: title.into(),
            region: region.into(),
            streaming: None,
            rental: Some(CostAmount { cost, currency: "USD".into() }),
            physical: None,
        }
    }

    fn stream_entry(title: &str, region: &str, service: &str, cost: f64) -> PricingEntry {
        PricingEntry {
            title_id: title.into(),
            region: region.into(),
            streaming: Some(StreamingOffer {
                service_name: service.into(),
                monthly_cost: cost,
                currency: "USD".into(),
            }),
            rental: None,
            physical: None,
        }
    }

    fn mv(title: &str, region: &str, views: u64) -> MatchedView {
        MatchedView { title_id: title.into(), region: region.into(), views }
    }

    #[test]
    fn hundred_views_buy_one_rental() {
        let pricing = PricingCatalog::new(vec![rental_entry("t1", "US", 3.99)]).unwrap();
        let est = estimate(&[mv("t1", "US", 100)], &pricing, &usd_fx());
        assert_eq!(est.groups.len(), 1);
        assert_eq!(est.groups[0].consumptions, 1);
        assert!((est.total_usd - 3.99).abs() < 1e-9);
    }

    #[test]
    fn ninety_nine_views_buy_nothing() {
        let pricing = PricingCatalog::new(vec![rental_entry("t1", "US", 3.99)]).unwrap();
        let est = estimate(&[mv("t1", "US", 99)], &pricing, &usd_fx());
        assert_eq!(est.groups[0].consumptions, 0);
        assert_eq!(est.total_usd, 0.0);
    }

    #[test]
    fn same_service_same_region_groups_views() {
        let pricing = PricingCatalog::new(vec![
            stream_entry("t1", "US", "flix", 7.99),
            stream_entry("t2", "US", "flix", 8.99),
        ])
        .unwrap();
        let est = estimate(&[mv("t1", "US", 300), mv("t2", "US", 200)], &pricing, &usd_fx());
        assert_eq!(est.groups.len(), 1);
        let g = &est.groups[0];
        assert_eq!(
            g.key,
            GroupKey::Streaming { service: "flix".into(), region: "US".into() }
        );
        assert_eq!(g.views_total, 500);
        assert_eq!(g.consumptions, 5);
        assert!((g.unit_cost_usd - 7.99).abs() < 1e-9, "lowest tier of the service");
        assert!((est.total_usd - 39.95).abs() < 1e-9);
        assert_eq!(g.members.len(), 2);
    }

    #[test]
    fn same_service_other_region_is_a_distinct_group() {
        let pricing = PricingCatalog::new(vec![
            stream_entry("t1", "US", "flix", 7.99),
            stream_entry("t2", "GB", "flix", 7.99),
        ])
        .unwrap();
        let est = estimate(&[mv("t1", "US", 100), mv("t2", "GB", 100)], &pricing, &usd_fx());
        assert_eq!(est.groups.len(), 2);
    }

    #[test]
    fn multi_service_title_takes_cheapest_service() {
        let pricing = PricingCatalog::new(vec![
            stream_entry("t1", "US", "pricey", 15.99),
            stream_entry("t1", "US", "cheap", 5.99),
        ])
        .unwrap();
        let est = estimate(&[mv("t1", "US", 100)], &pricing, &usd_fx());
        assert_eq!(est.groups.len(), 1);
        assert_eq!(
            est.groups[0].key,
            GroupKey::Streaming { service: "cheap".into(), region: "US".into() }
        );
        assert!((est.total_usd - 5.99).abs() < 1e-9);
    }

    #[test]
    fn streaming_outranks_rental_when_both_exist() {
        let pricing = PricingCatalog::new(vec![
            stream_entry("t1", "US", "flix", 7.99),
            rental_entry("t1", "US", 3.99),
        ])
        .unwrap();
        let est = estimate(&[mv("t1", "US", 100)], &pricing, &usd_fx());
        assert!(matches!(est.groups[0].key, GroupKey::Streaming { .. }));
    }

    #[test]
    fn rental_preferred_over_physical() {
        let mut e = rental_entry("t1", "US", 3.99);
        e.physical = Some(CostAmount { cost: 1.99, currency: "USD".into() });
        let pricing = PricingCatalog::new(vec![e]).unwrap();
        let est = estimate(&[mv("t1", "US", 100)], &pricing, &usd_fx());
        assert!((est.total_usd - 3.99).abs() < 1e-9, "rental wins even when pricier");
    }

    #[test]
    fn physical_fallback_when_no_rental() {
        let pricing = PricingCatalog::new(vec![PricingEntry {
            title_id: "t1".into(),
            region: "US".into(),
            streaming: None,
            rental: None,
            physical: Some(CostAmount { cost: 14.99, currency: "USD".into() }),
        }])
        .unwrap();
        let est = estimate(&[mv("t1", "US", 250)], &pricing, &usd_fx());
        assert_eq!(est.groups[0].consumptions, 2);
        assert!((est.total_usd - 29.98).abs() < 1e-9);
    }

    #[test]
    fn unknown_title_lands_in_unpriced_ledger() {
        let pricing = PricingCatalog::new(vec![rental_entry("t1", "US", 3.99)]).unwrap();
        let est = estimate(&[mv("ghost", "US", 500)], &pricing, &usd_fx());
        assert!(est.groups.is_empty());
        assert_eq!(est.unpriced.len(), 1);
        assert_eq!(est.unpriced[0].why, UnpricedReason::NoPricing);
        assert_eq!(est.unpriced[0].views_total, 500);
        assert_eq!(est.total_usd, 0.0);
    }

    #[test]
    fn missing_fx_skips_group_and_reports_currency() {
        let mut entry = rental_entry("t1", "IR", 200_000.0);
        entry.rental.as_mut().unwrap().currency = "IRR".into();
        let pricing = PricingCatalog::new(vec![entry]).unwrap();
        let est = estimate(&[mv("t1", "IR", 1000)], &pricing, &usd_fx());
        assert!(est.groups.is_empty());
        assert_eq!(
            est.unpriced[0].why,
            UnpricedReason::MissingFxRate { currency: "IRR".into() }
        );
    }

    #[test]
    fn consumption_count_matches_per_unit_oracle() {
        // Oracle: walk views one by one, one consumption per complete 100.
        fn oracle(views: u64) -> u64 {
            let mut run = 0u64;
            let mut bought = 0u64;
            for _ in 0..views {
                run += 1;
                if run == 100 {
                    bought += 1;
                    run = 0;
                }
            }
            bought
        }
        for v in [0u64, 1, 99, 100, 101, 199, 200, 12345] {
            assert_eq!(consumptions(v), oracle(v), "views={v}");
        }
    }

    #[test]
    fn grouping_is_conservative_vs_unfloored_individual_pricing() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..50 {
            let n_titles = rng.random_range(1..12usize);
            let cost = rng.random_range(3.0..20.0f64);
            let entries: Vec<PricingEntry> = (0..n_titles)
                .map(|i| stream_entry(&format!("t{i}"), "US", "flix", cost))
                .collect();
            let pricing = PricingCatalog::new(entries).unwrap();
            let matches: Vec<MatchedView> = (0..n_titles)
                .map(|i| mv(&format!("t{i}"), "US", rng.random_range(0..5000u64)))
                .collect();
            let est = estimate(&matches, &pricing, &usd_fx());
            let unfloored: f64 = matches
                .iter()
                .map(|m| m.views as f64 / VIEWS_PER_CONSUMPTION as f64 * cost)
                .sum();
            assert!(
                est.total_usd <= unfloored + 1e-9,
                "trial {trial}: grouped {} > unfloored {}",
                est.total_usd,
                unfloored
            );
        }
    }

    #[test]
    fn adding_views_never_decreases_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pricing = PricingCatalog::new(vec![
            stream_entry("t0", "US", "flix", 7.99),
            stream_entry("t1", "US", "flix", 7.99),
            rental_entry("t2", "US", 3.99),
        ])
        .unwrap();
        let mut matches = vec![
            mv("t0", "US", rng.random_range(0..1000)),
            mv("t1", "US", rng.random_range(0..1000)),
            mv("t2", "US", rng.random_range(0..1000)),
        ];
        let mut last = estimate(&matches, &pricing, &usd_fx()).total_usd;
        for _ in 0..200 {
            let idx = rng.random_range(0..matches.len());
            matches[idx].views += rng.random_range(1..300u64);
            let now = estimate(&matches, &pricing, &usd_fx()).total_usd;
            assert!(now + 1e-9 >= last, "views up, total down: {now} < {last}");
            last = now;
        }
    }

    #[test]
    fn currency_conversion_leaves_total_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let n = rng.random_range(1..8usize);
            let entries_usd: Vec<PricingEntry> = (0..n)
                .map(|i| {
                    if i % 3 == 0 {
                        rental_entry(&format!("t{i}"), "US", rng.random_range(1.0..30.0))
                    } else {
                        stream_entry(
                            &format!("t{i}"),
                            "US",
                            &format!("svc{}", i % 2),
                            rng.random_range(4.0..20.0),
                        )
                    }
                })
                .collect();
            let rate = rng.random_range(0.01..50.0f64);
            let entries_conv: Vec<PricingEntry> = entries_usd
                .iter()
                .cloned()
                .map(|mut e| {
                    if let Some(s) = &mut e.streaming {
                        s.monthly_cost /= rate;
                        s.currency = "TST".into();
                    }
                    if let Some(r) = &mut e.rental {
                        r.cost /= rate;
                        r.currency = "TST".into();
                    }
                    e
                })
                .collect();
            let matches: Vec<MatchedView> = (0..n)
                .map(|i| mv(&format!("t{i}"), "US", rng.random_range(0..3000u64)))
                .collect();
            let a = estimate(
                &matches,
                &PricingCatalog::new(entries_usd).unwrap(),
                &usd_fx(),
            )
            .total_usd;
            let fx2 = ExchangeTable::new(
                [("USD".to_string(), 1.0), ("TST".to_string(), rate)],
                "2026-01-31",
            )
            .unwrap();
            let b = estimate(
                &matches,
                &PricingCatalog::new(entries_conv).unwrap(),
                &fx2,
            )
            .total_usd;
            let denom = a.abs().max(1.0);
            assert!((a - b).abs() / denom < 1e-6, "a={a} b={b}");
        }
    }

    #[test]
    fn total_is_sum_of_group_losses() {
        let pricing = PricingCatalog::new(vec![
            stream_entry("t0", "US", "flix", 7.99),
            rental_entry("t1", "US", 3.99),
        ])
        .unwrap();
        let est = estimate(
            &[mv("t0", "US", 777), mv("t1", "US", 450)],
            &pricing,
            &usd_fx(),
        );
        let sum: f64 = est.groups.iter().map(|g| g.loss_usd).sum();
        assert!((est.total_usd - sum).abs() < 1e-12);
        assert!(est.groups.iter().all(|g| g.loss_usd >= 0.0));
    }

    #[test]
    fn region_inference_from_language_tags() {
        let map = LanguageMap::builtin();
        let mut post = PostRecord::new("c", 1, 0, "text");
        post.language_tag = Some("fa".into());
        assert_eq!(infer_region(&post, map), "IR");
        post.language_tag = Some("en".into());
        assert_eq!(infer_region(&post, map), "US");
        post.language_tag = Some("pt-BR".into());
        assert_eq!(infer_region(&post, map), "BR");
        post.language_tag = Some("xx".into());
        assert_eq!(infer_region(&post, map), "ZZ");
        post.language_tag = None;
        assert_eq!(infer_region(&post, map), "ZZ");
    }

    #[test]
    fn exchange_table_validation() {
        assert!(ExchangeTable::new([("USD".to_string(), 2.0)], "x").is_err());
        assert!(ExchangeTable::new([("EUR".to_string(), -1.0)], "x").is_err());
        let t = ExchangeTable::new([("EUR".to_string(), 1.08)], "x").unwrap();
        assert_eq!(t.rates["USD"], 1.0, "USD injected at par");
        assert_eq!(
            t.to_usd(10.0, "gel").unwrap_err(),
            MissingFxRate("GEL".into())
        );
    }

    #[test]
    fn pricing_validation_rejects_bad_entries() {
        let empty = PricingEntry {
            title_id: "t".into(),
            region: "US".into(),
            streaming: None,
            rental: None,
            physical: None,
        };
        assert!(PricingCatalog::new(vec![empty]).is_err());
        assert!(PricingCatalog::new(vec![rental_entry("t", "US", 0.0)]).is_err());
        assert!(PricingCatalog::new(vec![rental_entry("t", "US", -2.0)]).is_err());
    }

    #[test]
    fn jsonl_round_trip_and_comments() {
        let text = format!(
            "# comment\n{}\n\n{}\n",
            serde_json::to_string(&rental_entry("t1", "US", 3.99)).unwrap(),
            serde_json::to_string(&stream_entry("t2", "GB", "flix", 6.99)).unwrap()
        );
        let cat = PricingCatalog::from_reader(text.as_bytes()).unwrap();
        assert_eq!(cat.len(), 2);
        assert_eq!(cat.lookup("t2", "GB").len(), 1);
    }

    #[test]
    fn fixture_pricing_covers_catalog_and_parses() {
        let catalog = crate::catalog::fixture::catalog();
        let regions: Vec<String> = ["US", "GB", "IN", "KR", "BR"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let entries = fixture::pricing_for(catalog.entries(), &regions);
        assert_eq!(entries.len(), catalog.entries().len() * regions.len());
        let text = fixture::to_jsonl(&entries);
        let cat = PricingCatalog::from_reader(text.as_bytes()).unwrap();
        assert_eq!(cat.len(), entries.len());
        let fx = fixture::fx_table();
        // Every fixture entry is priceable with the fixture fx table.
        let matches: Vec<MatchedView> = catalog
            .entries()
            .iter()
            .map(|e| mv(&e.id, "IN", 150))
            .collect();
        let est = estimate(&matches, &cat, &fx);
        assert!(est.unpriced.is_empty());
        assert!(est.total_usd > 0.0);
    }

    #[test]
    fn rollup_attributes_by_country_and_kind() {
        let catalog = crate::catalog::fixture::catalog();
        let e0 = &catalog.entries()[0];
        let pricing =
            PricingCatalog::new(vec![stream_entry(&e0.id, "US", "flix", 7.99)]).unwrap();
        let est = estimate(&[mv(&e0.id, "US", 1000)], &pricing, &usd_fx());
        let rows = rollup(&est, &catalog);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].country, e0.countries[0]);
        assert!((rows[0].loss_usd - est.total_usd).abs() < 1e-9);
    }
}
