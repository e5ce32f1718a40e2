//! Label vocabulary for piracy channel behaviors.
//!
//! Eight groups, twenty-five leaves. Group and leaf names are stable wire
//! identifiers (snake_case) used in verdict files and reports.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Top-level behavior group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    InternalDistribution,
    ExternalDistribution,
    ResilienceStrategies,
    FacilitatingAccess,
    BotCategories,
    CommunityGrowth,
    Monetization,
    PresentationAccessibility,
}

impl Group {
    pub const ALL: [Group; 8] = [
        Group::InternalDistribution,
        Group::ExternalDistribution,
        Group::ResilienceStrategies,
        Group::FacilitatingAccess,
        Group::BotCategories,
        Group::CommunityGrowth,
        Group::Monetization,
        Group::PresentationAccessibility,
    ];

    /// Default priority rank used to pick the primary label; lower wins.
    /// BotCategories sits below the access group and only applies to
    /// bot-authored posts in the first place.
    pub fn default_priority(self) -> usize {
        match self {
            Group::InternalDistribution => 0,
            Group::ExternalDistribution => 1,
            Group::ResilienceStrategies => 2,
            Group::FacilitatingAccess => 3,
            Group::BotCategories => 4,
            Group::Monetization => 5,
            Group::CommunityGrowth => 6,
            Group::PresentationAccessibility => 7,
        }
    }

    pub fn wire_name(self) -> &'static str {
        match self {
            Group::InternalDistribution => "internal_distribution",
            Group::ExternalDistribution => "external_distribution",
            Group::ResilienceStrategies => "resilience_strategies",
            Group::FacilitatingAccess => "facilitating_access",
            Group::BotCategories => "bot_categories",
            Group::CommunityGrowth => "community_growth",
            Group::Monetization => "monetization",
            Group::PresentationAccessibility => "presentation_accessibility",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.wire_name())
    }
}

/// Leaf behavior label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Leaf {
    // internal_distribution
    DirectDownload,
    ChannelBotRouting,
    // external_distribution
    CloudStorage,
    StreamingMagnet,
    // resilience_strategies
    DedicatedContentChannel,
    DirectoryIndexChannel,
    BackupChannel,
    IntermediaryRouting,
    // facilitating_access
    VpnProxyMirror,
    ModdedApp,
    StreamingCredentials,
    AccessTutorial,
    // bot_categories
    ContentDelivery,
    DynamicRetrieval,
    ChannelPromotion,
    ContentIngestion,
    // community_growth
    ContentRequest,
    ChannelReferral,
    ForcedJoin,
    // monetization
    CreditPurchase,
    PremiumTier,
    IncentivizedUpload,
    // presentation_accessibility
    ResolutionEncoding,
    BundledCollection,
    SubtitlesDubs,
}

impl Leaf {
    pub const ALL: [Leaf; 25] = [
        Leaf::DirectDownload,
        Leaf::ChannelBotRouting,
        Leaf::CloudStorage,
        Leaf::StreamingMagnet,
        Leaf::DedicatedContentChannel,
        Leaf::DirectoryIndexChannel,
        Leaf::BackupChannel,
        Leaf::IntermediaryRouting,
        Leaf::VpnProxyMirror,
        Leaf::ModdedApp,
        Leaf::StreamingCredentials,
        Leaf::AccessTutorial,
        Leaf::ContentDelivery,
        Leaf::DynamicRetrieval,
        Leaf::ChannelPromotion,
        Leaf::ContentIngestion,
        Leaf::ContentRequest,
        Leaf::ChannelReferral,
        Leaf::ForcedJoin,
        Leaf::CreditPurchase,
        Leaf::PremiumTier,
        Leaf::IncentivizedUpload,
        Leaf::ResolutionEncoding,
        Leaf::BundledCollection,
        Leaf::SubtitlesDubs,
    ];

    pub fn group(self) -> Group {
        match self {
            Leaf::DirectDownload | Leaf::ChannelBotRouting => Group::InternalDistribution,
            Leaf::CloudStorage | Leaf::StreamingMagnet => Group::ExternalDistribution,
            Leaf::DedicatedContentChannel
            | Leaf::DirectoryIndexChannel
            | Leaf::BackupChannel
            | Leaf::IntermediaryRouting => Group::ResilienceStrategies,
            Leaf::VpnProxyMirror
            | Leaf::ModdedApp
            | Leaf::StreamingCredentials
            | Leaf::AccessTutorial => Group::FacilitatingAccess,
            Leaf::ContentDelivery
            | Leaf::DynamicRetrieval
            | Leaf::ChannelPromotion
            | Leaf::ContentIngestion => Group::BotCategories,
            Leaf::ContentRequest | Leaf::ChannelReferral | Leaf::ForcedJoin => {
                Group::CommunityGrowth
            }
            Leaf::CreditPurchase | Leaf::PremiumTier | Leaf::IncentivizedUpload => {
                Group::Monetization
            }
            Leaf::ResolutionEncoding | Leaf::BundledCollection | Leaf::SubtitlesDubs => {
                Group::PresentationAccessibility
            }
        }
    }

    pub fn wire_name(self) -> &'static str {
        match self {
            Leaf::DirectDownload => "direct_download",
            Leaf::ChannelBotRouting => "channel_bot_routing",
            Leaf::CloudStorage => "cloud_storage",
            Leaf::StreamingMagnet => "streaming_magnet",
            Leaf::DedicatedContentChannel => "dedicated_content_channel",
            Leaf::DirectoryIndexChannel => "directory_index_channel",
            Leaf::BackupChannel => "backup_channel",
            Leaf::IntermediaryRouting => "intermediary_routing",
            Leaf::VpnProxyMirror => "vpn_proxy_mirror",
            Leaf::ModdedApp => "modded_app",
            Leaf::StreamingCredentials => "streaming_credentials",
            Leaf::AccessTutorial => "access_tutorial",
            Leaf::ContentDelivery => "content_delivery",
            Leaf::DynamicRetrieval => "dynamic_retrieval",
            Leaf::ChannelPromotion => "channel_promotion",
            Leaf::ContentIngestion => "content_ingestion",
            Leaf::ContentRequest => "content_request",
            Leaf::ChannelReferral => "channel_referral",
            Leaf::ForcedJoin => "forced_join",
            Leaf::CreditPurchase => "credit_purchase",
            Leaf::PremiumTier => "premium_tier",
            Leaf::IncentivizedUpload => "incentivized_upload",
            Leaf::ResolutionEncoding => "resolution_encoding",
            Leaf::BundledCollection => "bundled_collection",
            Leaf::SubtitlesDubs => "subtitles_dubs",
        }
    }

    /// Position within the leaf's group, used to break priority ties.
    pub fn index_in_group(self) -> usize {
        let group = self.group();
        Leaf::ALL
            .iter()
            .filter(|l| l.group() == group)
            .position(|&l| l == self)
            .expect("leaf belongs to its own group")
    }
}

impl fmt::Display for Leaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.wire_name())
    }
}

/// A (group, leaf) pair. The group is derivable from the leaf; it is kept
/// explicit so serialized labels are self-describing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaxonomyLabel {
    pub group: Group,
    pub leaf: Leaf,
}

impl TaxonomyLabel {
    pub fn new(leaf: Leaf) -> Self {
        TaxonomyLabel { group: leaf.group(), leaf }
    }
}

impl From<Leaf> for TaxonomyLabel {
    fn from(leaf: Leaf) -> Self {
        TaxonomyLabel::new(leaf)
    }
}

/// A label plus the rationale the classifier gave for assigning it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignedLabel {
    pub group: Group,
    pub leaf: Leaf,
    pub justification: String,
}

impl AssignedLabel {
    pub fn new(leaf: Leaf, justification: impl Into<String>) -> Self {
        AssignedLabel { group: leaf.group(), leaf, justification: justification.into() }
    }
}

/// Classification outcome for one post. `labels` is ordered: the first entry
/// is the primary label, any further entries (at most two) are secondary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostVerdict {
    pub channel_id: String,
    pub post_id: i64,
    pub is_piracy: bool,
    pub labels: Vec<AssignedLabel>,
}

impl PostVerdict {
    pub fn benign(channel_id: impl Into<String>, post_id: i64) -> Self {
        PostVerdict { channel_id: channel_id.into(), post_id, is_piracy: false, labels: Vec::new() }
    }

    pub fn primary(&self) -> Option<Leaf> {
        self.labels.first().map(|l| l.leaf)
    }

    pub fn secondaries(&self) -> Vec<Leaf> {
        self.labels.iter().skip(1).map(|l| l.leaf).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_five_leaves_eight_groups() {
        assert_eq!(Leaf::ALL.len(), 25);
        assert_eq!(Group::ALL.len(), 8);
        for group in Group::ALL {
            let n = Leaf::ALL.iter().filter(|l| l.group() == group).count();
            match group {
                Group::InternalDistribution | Group::ExternalDistribution => assert_eq!(n, 2),
                Group::ResilienceStrategies
                | Group::FacilitatingAccess
                | Group::BotCategories => assert_eq!(n, 4),
                Group::CommunityGrowth
                | Group::Monetization
                | Group::PresentationAccessibility => assert_eq!(n, 3),
            }
        }
    }

    #[test]
    fn wire_names_round_trip_through_serde() {
        for leaf in Leaf::ALL {
            let json = serde_json::to_string(&leaf).unwrap();
            assert_eq!(json, format!("\"{}\"", leaf.wire_name()));
            let back: Leaf = serde_json::from_str(&json).unwrap();
            assert_eq!(back, leaf);
        }
        for group in Group::ALL {
            let json = serde_json::to_string(&group).unwrap();
            assert_eq!(json, format!("\"{}\"", group.wire_name()));
            let back: Group = serde_json::from_str(&json).unwrap();
            assert_eq!(back, group);
        }
    }

    #[test]
    fn priority_ranks_are_a_permutation() {
        let mut ranks: Vec<usize> = Group::ALL.iter().map(|g| g.default_priority()).collect();
        ranks.sort_unstable();
        assert_eq!(ranks, (0..8).collect::<Vec<_>>());
        assert!(
            Group::InternalDistribution.default_priority()
                < Group::ExternalDistribution.default_priority()
        );
        assert!(
            Group::Monetization.default_priority() < Group::CommunityGrowth.default_priority()
        );
        assert_eq!(Group::PresentationAccessibility.default_priority(), 7);
    }

    #[test]
    fn verdict_wire_format() {
        let v = PostVerdict {
            channel_id: "ch0001".into(),
            post_id: 7,
            is_piracy: true,
            labels: vec![AssignedLabel::new(Leaf::DirectDownload, "file attached")],
        };
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["channel_id"], "ch0001");
        assert_eq!(json["post_id"], 7);
        assert_eq!(json["is_piracy"], true);
        assert_eq!(json["labels"][0]["group"], "internal_distribution");
        assert_eq!(json["labels"][0]["leaf"], "direct_download");
        assert_eq!(json["labels"][0]["justification"], "file attached");
    }
}
