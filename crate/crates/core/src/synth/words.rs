//! Vocabulary for synthetic labels.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::matching::text_similarity;

const WORDS: &[&str] = &[
    "account", "activity", "address", "airplane", "album", "alarm", "archive", "artist", "audio", "backup",
    "badge", "balance", "banner", "battery", "billing", "bookmark", "browse", "budget", "calendar", "camera",
    "capture", "cellular", "channel", "checkout", "circle", "classic", "cloud", "coffee", "collection", "comment",
    "compass", "contact", "coupon", "credit", "cycle", "daily", "delivery", "deposit", "device", "diary",
    "display", "document", "donate", "download", "draft", "editor", "energy", "event", "explore", "family",
    "favorite", "feedback", "filter", "finance", "fitness", "flight", "folder", "forecast", "garden", "gallery",
    "general", "gift", "glucose", "grocery", "guide", "habit", "health", "history", "holiday", "hotel",
    "inbox", "insight", "invoice", "journal", "keyboard", "kitchen", "language", "library", "lighting", "locate",
    "lyrics", "mailbox", "market", "meeting", "member", "memo", "message", "meter", "monthly", "movie",
    "network", "notes", "offers", "orders", "outdoor", "package", "parking", "payment", "people", "photos",
    "pickup", "planner", "playlist", "podcast", "portfolio", "privacy", "profile", "promo", "purchase", "queue",
    "radio", "receipt", "recipe", "record", "refund", "reminder", "rental", "reward", "route", "running",
    "safety", "savings", "schedule", "search", "security", "sensor", "session", "shipping", "shortcut", "sleep",
    "sound", "speaker", "sports", "storage", "studio", "subscribe", "summary", "support", "sync", "ticket",
    "timer", "traffic", "transfer", "travel", "trending", "upload", "vacation", "vault", "video", "voice",
    "volume", "wallet", "weather", "weekly", "widget", "window", "workout", "yoga", "zone", "zoom",
];

/// Hands out labels that no fuzzy matcher would confuse with each other.
#[derive(Debug, Clone, Default)]
pub struct PhraseBook {
    used: Vec<String>,
}

/// Pairwise similarity ceiling between any two labels of one app.
const MAX_SIMILARITY: f64 = 0.8;

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

impl PhraseBook {
    /// A fresh label of at most `max_chars` characters.
    pub fn fresh(&mut self, rng: &mut ChaCha8Rng, max_chars: usize) -> String {
        for attempt in 0.. {
            let words = if attempt > 40 || rng.random_bool(0.5) { 1 } else { 2 };
            let mut parts: Vec<String> = (0..words).map(|_| WORDS.choose(rng).expect("vocabulary").to_string()).collect();
            if attempt > 200 {
                parts.push(rng.random_range(2..100).to_string());
            }
            parts[0] = capitalize(&parts[0]);
            let phrase = parts.join(" ");
            if phrase.chars().count() > max_chars {
                continue;
            }
            if self.used.iter().all(|u| text_similarity(u, &phrase) < MAX_SIMILARITY) {
                self.used.push(phrase.clone());
                return phrase;
            }
        }
        unreachable!("the loop only exits by returning")
    }
}
