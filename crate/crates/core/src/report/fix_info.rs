//! Static remediation hints shown next to each check.

use crate::capture::IssueCategory;

/// Check names emitted by the inspector that we carry specific text for.
const KNOWN: &[(&str, &str)] = &[
    ("Element has no description", "Give the element an accessibility label that says what it is or does."),
    ("Description is not human readable", "Replace identifier-style labels with plain words a person would say."),
    ("Image name used as description", "The label is an asset name. Describe the image content or hide decorative images."),
    ("Contrast failed", "Raise the contrast between text and background to at least 4.5:1 (3:1 for large text)."),
    ("Contrast nearly passed", "Contrast is just below the minimum ratio. Darken or lighten one of the colors slightly."),
    ("Hit area is too small", "Make the tappable area at least 44 by 44 points, padding it if the visual stays small."),
    ("Element not reachable", "Expose the element to assistive technologies so it can be focused."),
    ("Text clipped", "Let the label wrap or grow instead of truncating at larger text sizes."),
    ("Element has no traits", "Add the trait that matches the control's behavior, such as button or header."),
    ("Trait may be missing", "Check whether the element acts as a button, link or header and add that trait."),
    ("Dynamic Type font sizes are unsupported", "Use scalable text styles so the label follows the user's text size."),
    ("Dynamic Type font size partially unsupported", "Some text on this element does not scale. Use text styles throughout."),
];

pub fn known_checks() -> impl Iterator<Item = &'static str> {
    KNOWN.iter().map(|(name, _)| *name)
}

/// Fix text for a check, falling back to a per-category hint.
pub fn fix_info(category: IssueCategory, check_name: &str) -> &'static str {
    if let Some((_, text)) = KNOWN.iter().find(|(name, _)| name.eq_ignore_ascii_case(check_name)) {
        return text;
    }
    match category {
        IssueCategory::ElementDescription => "Make sure the element has a concise, meaningful accessibility label.",
        IssueCategory::Contrast => "Increase the color contrast of the element against its background.",
        IssueCategory::HitRegion => "Enlarge the element's touch target.",
        IssueCategory::ElementDetection => "Make the element visible to assistive technologies.",
        IssueCategory::ClippedText => "Let text wrap or resize rather than clip.",
        IssueCategory::Traits => "Give the element traits that describe its behavior.",
        IssueCategory::LargeText => "Support Dynamic Type for all text on the element.",
    }
}
