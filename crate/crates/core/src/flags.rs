//! Structured financial-semantics flags fired by surface text patterns.
//!
//! A [`RuleSet`] holds, per flag, literal keyword/phrase patterns, token
//! templates with numeric wildcards, and co-occurrence lists (a subject word
//! and a direction word in the same sentence). Matching is case-insensitive
//! and whitespace-tolerant. Negation is not handled: "profit did not rise"
//! still fires `profit_up`.

use std::fmt;
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kvconfig;

/// The rule file shipped with the crate.
pub const DEFAULT_RULES: &str = include_str!("../rules/default.rules");

/// Suffixes a literal word may carry and still match.
const SUFFIXES: &str = "(?:s|es|d|ed|ing)?";

/// A number with optional currency and magnitude/unit, e.g. `EUR 8.7 mn`, `-3%`.
const NUMBER: &str = r"(?:(?:eur|euro|euros|usd|gbp|sek|nok|dkk|chf|jpy|rub|pln|[$€£])\s*)?[+-]?\d[\d,]*(?:\.\d+)?(?:\s*(?:%|percent|pct|mn|mln|million|m|bn|billion|k|thousand|eur|euro|euros|usd)\b)?";

const WORD: &str = r"[\w'’-]+";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flag {
    Comparative,
    LossNarrowed,
    LossWidened,
    ProfitUp,
    CostDown,
    ContractFinancing,
    UncertaintyOneoff,
    StableGuidance,
    OperationalUpdate,
}

impl Flag {
    /// Serialization order of the flag bits.
    pub const ALL: [Flag; 9] = [
        Flag::Comparative,
        Flag::LossNarrowed,
        Flag::LossWidened,
        Flag::ProfitUp,
        Flag::CostDown,
        Flag::ContractFinancing,
        Flag::UncertaintyOneoff,
        Flag::StableGuidance,
        Flag::OperationalUpdate,
    ];

    pub const COUNT: usize = 9;

    pub fn name(self) -> &'static str {
        match self {
            Flag::Comparative => "comparative",
            Flag::LossNarrowed => "loss_narrowed",
            Flag::LossWidened => "loss_widened",
            Flag::ProfitUp => "profit_up",
            Flag::CostDown => "cost_down",
            Flag::ContractFinancing => "contract_financing",
            Flag::UncertaintyOneoff => "uncertainty_oneoff",
            Flag::StableGuidance => "stable_guidance",
            Flag::OperationalUpdate => "operational_update",
        }
    }

    pub fn from_name(name: &str) -> Option<Flag> {
        Flag::ALL.into_iter().find(|f| f.name() == name)
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FlagSet {
    pub comparative: bool,
    pub loss_narrowed: bool,
    pub loss_widened: bool,
    pub profit_up: bool,
    pub cost_down: bool,
    pub contract_financing: bool,
    pub uncertainty_oneoff: bool,
    pub stable_guidance: bool,
    pub operational_update: bool,
}

impl FlagSet {
    pub fn get(&self, flag: Flag) -> bool {
        self.bits()[flag.index()]
    }

    fn set(&mut self, flag: Flag, on: bool) {
        let slot = match flag {
            Flag::Comparative => &mut self.comparative,
            Flag::LossNarrowed => &mut self.loss_narrowed,
            Flag::LossWidened => &mut self.loss_widened,
            Flag::ProfitUp => &mut self.profit_up,
            Flag::CostDown => &mut self.cost_down,
            Flag::ContractFinancing => &mut self.contract_financing,
            Flag::UncertaintyOneoff => &mut self.uncertainty_oneoff,
            Flag::StableGuidance => &mut self.stable_guidance,
            Flag::OperationalUpdate => &mut self.operational_update,
        };
        *slot = on;
    }

    /// Bits in [`Flag::ALL`] order.
    pub fn bits(&self) -> [bool; 9] {
        [
            self.comparative,
            self.loss_narrowed,
            self.loss_widened,
            self.profit_up,
            self.cost_down,
            self.contract_financing,
            self.uncertainty_oneoff,
            self.stable_guidance,
            self.operational_update,
        ]
    }

    /// Bits as 0/1 reals, in [`Flag::ALL`] order.
    pub fn as_features(&self) -> [f64; 9] {
        self.bits().map(|b| if b { 1.0 } else { 0.0 })
    }

    pub fn active(&self) -> Vec<Flag> {
        Flag::ALL.into_iter().filter(|&f| self.get(f)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternKind {
    Keyword,
    Phrase,
    Template,
    Subject,
    Direction,
}

impl PatternKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "keyword" => PatternKind::Keyword,
            "phrase" => PatternKind::Phrase,
            "template" => PatternKind::Template,
            "subject" => PatternKind::Subject,
            "direction" => PatternKind::Direction,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub kind: PatternKind,
    pub text: String,
}

#[derive(Debug, Clone)]
struct CompiledFlag {
    flag: Flag,
    patterns: Vec<Pattern>,
    /// Union of keyword, phrase and template patterns.
    direct: Option<Regex>,
    cooccur: Option<(Regex, Regex)>,
}

impl CompiledFlag {
    /// Byte offset of the earliest match in `text`, if the flag fires.
    fn first_match(&self, text: &str, sentences: &[(usize, &str)]) -> Option<usize> {
        let direct = self.direct.as_ref().and_then(|re| re.find(text)).map(|m| m.start());
        let co = self.cooccur.as_ref().and_then(|(subj, dir)| {
            sentences.iter().find_map(|&(offset, s)| {
                let a = subj.find(s)?;
                let b = dir.find(s)?;
                Some(offset + a.start().min(b.start()))
            })
        });
        match (direct, co) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// A compiled, immutable set of flag rules.
#[derive(Debug, Clone)]
pub struct RuleSet {
    flags: Vec<CompiledFlag>,
}

impl RuleSet {
    /// The shipped default rules.
    pub fn default_rules() -> Self {
        Self::parse(DEFAULT_RULES, "<default rules>").expect("shipped rule file compiles")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&src, &path.display().to_string())
    }

    /// Parse and compile a rule file. Every flag needs a section with at
    /// least one pattern.
    pub fn parse(src: &str, origin: &str) -> Result<Self> {
        let sections = kvconfig::parse(src, origin)?;
        let err = |line: usize, message: String| Error::Config {
            location: format!("{origin}:{line}"),
            message,
        };

        let mut slots: Vec<Option<CompiledFlag>> = vec![None; Flag::COUNT];
        for section in &sections {
            let flag = Flag::from_name(&section.name)
                .ok_or_else(|| err(section.line, format!("unknown flag [{}]", section.name)))?;
            let mut patterns = Vec::new();
            let mut direct = Vec::new();
            let mut subjects = Vec::new();
            let mut directions = Vec::new();
            for e in &section.entries {
                let kind = PatternKind::parse(&e.key)
                    .ok_or_else(|| err(e.line, format!("unknown pattern kind '{}'", e.key)))?;
                if e.value.is_empty() {
                    return Err(err(e.line, "empty pattern".into()));
                }
                let source = match kind {
                    PatternKind::Template => compile_template(&e.value).map_err(|m| err(e.line, m))?,
                    _ => literal_pattern(&e.value),
                };
                match kind {
                    PatternKind::Keyword | PatternKind::Phrase | PatternKind::Template => direct.push(source),
                    PatternKind::Subject => subjects.push(source),
                    PatternKind::Direction => directions.push(source),
                }
                patterns.push(Pattern {
                    kind,
                    text: e.value.clone(),
                });
            }
            if subjects.is_empty() != directions.is_empty() {
                return Err(err(
                    section.line,
                    format!(
                        "[{}] co-occurrence needs both subject= and direction= entries",
                        section.name
                    ),
                ));
            }
            if patterns.is_empty() {
                return Err(err(section.line, format!("[{}] has no patterns", section.name)));
            }
            let direct = union(&direct).map_err(|m| err(section.line, m))?;
            let cooccur = if subjects.is_empty() {
                None
            } else {
                let s = union(&subjects).map_err(|m| err(section.line, m))?.expect("non-empty");
                let d = union(&directions)
                    .map_err(|m| err(section.line, m))?
                    .expect("non-empty");
                Some((s, d))
            };
            slots[flag.index()] = Some(CompiledFlag {
                flag,
                patterns,
                direct,
                cooccur,
            });
        }

        let mut flags = Vec::with_capacity(Flag::COUNT);
        for (flag, slot) in Flag::ALL.into_iter().zip(slots) {
            flags.push(slot.ok_or_else(|| Error::Config {
                location: origin.to_string(),
                message: format!("missing section [{flag}]"),
            })?);
        }
        Ok(RuleSet { flags })
    }

    /// Patterns configured for `flag`, in file order.
    pub fn patterns(&self, flag: Flag) -> &[Pattern] {
        &self.flags[flag.index()].patterns
    }

    /// Evaluate every flag on `text`.
    pub fn flag(&self, text: &str) -> FlagSet {
        let sentences = split_sentences(text);
        let mut out = FlagSet::default();
        let mut positions = [None; Flag::COUNT];
        for cf in &self.flags {
            let pos = cf.first_match(text, &sentences);
            positions[cf.flag.index()] = pos;
            out.set(cf.flag, pos.is_some());
        }
        // The two loss directions are exclusive; the earlier mention wins.
        if let (Some(n), Some(w)) = (
            positions[Flag::LossNarrowed.index()],
            positions[Flag::LossWidened.index()],
        ) {
            if n <= w {
                out.loss_widened = false;
            } else {
                out.loss_narrowed = false;
            }
        }
        out
    }
}

/// Flags for `text` under `rules`.
pub fn flag(text: &str, rules: &RuleSet) -> FlagSet {
    rules.flag(text)
}

/// Split on `.`, `;`, `!` or `?` followed by whitespace. Returns byte offsets
/// with each sentence.
fn split_sentences(text: &str) -> Vec<(usize, &str)> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if matches!(c, '.' | ';' | '!' | '?') {
            if let Some(&(j, next)) = chars.peek() {
                if next.is_whitespace() {
                    out.push((start, &text[start..i]));
                    start = j + next.len_utf8();
                }
            }
        }
    }
    if start < bytes.len() {
        out.push((start, &text[start..]));
    }
    out
}

fn word_regex(word: &str) -> String {
    let mut s = String::new();
    if word.chars().next().is_some_and(is_word_char) {
        s.push_str(r"\b");
    }
    s.push_str(&regex::escape(word));
    if word.chars().last().is_some_and(is_word_char) {
        s.push_str(SUFFIXES);
        s.push_str(r"\b");
    }
    s
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn literal_pattern(text: &str) -> String {
    text.split_whitespace().map(word_regex).collect::<Vec<_>>().join(r"\s+")
}

fn compile_template(text: &str) -> std::result::Result<String, String> {
    let mut parts = Vec::new();
    for tok in text.split_whitespace() {
        let part = match tok {
            "{num}" => format!("(?:{NUMBER})"),
            "{word}" => format!(r"\b{WORD}"),
            t if t.contains('{') || t.contains('}') => {
                return Err(format!(
                    "unknown template placeholder in '{t}' (expected {{num}} or {{word}})"
                ))
            }
            t => word_regex(t),
        };
        parts.push(part);
    }
    if parts.is_empty() {
        return Err("empty template".into());
    }
    Ok(parts.join(r"\s+"))
}

fn union(sources: &[String]) -> std::result::Result<Option<Regex>, String> {
    if sources.is_empty() {
        return Ok(None);
    }
    let joined = sources.iter().map(|s| format!("(?:{s})")).collect::<Vec<_>>().join("|");
    Regex::new(&format!("(?i){joined}"))
        .map(Some)
        .map_err(|e| format!("pattern does not compile: {e}"))
}
