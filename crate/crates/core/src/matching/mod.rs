//! Cross-screen UI element correspondence.

mod best_match;
mod groups;
mod ncc;
mod template;
mod text;

pub use best_match::{
    find_best_match, find_best_match_with, MatchConfig, MatchMethod, MatchResult, MatchStrategy, PreparedScreen,
};
pub use groups::{build_element_groups, group_text, is_icon_only, ElementGroupRecord, GroupIndex, GroupKind};
pub use ncc::ncc;
pub use template::{icon_match, preprocess_template, template_scales, TemplateRecord, SCALE_FACTORS, SEARCH_PADDING};
pub use text::{indel_distance, normalize_text, text_similarity};
