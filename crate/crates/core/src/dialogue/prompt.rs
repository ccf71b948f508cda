//! Location-aware prompt assembly.
//!
//! A template is a list of `[section]` blocks. Preamble blocks hold the
//! persona text for each handler; every context block holds one
//! `{content}` placeholder. Context blocks render in a fixed order and are
//! omitted entirely when they have nothing to show:
//! exhibit, sample_dialogue, area, nearby, history, utterance.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use super::Intent;
use crate::navsim::RobotState;
use crate::worldmap::{AnnotatedMap, Exhibit, ExhibitId, Speaker};

pub const DEFAULT_TEMPLATE: &str = "\
[preamble.inquiry_about_museum]
You are a guide robot in a geology museum, talking with a visitor who joins the tour remotely.
Reply to the question in two or three sentences, drawing only on the facts below. Close by inviting them to share whether they have ever collected or studied rocks.

[preamble.comment]
You are a guide robot in a geology museum, talking with a visitor who joins the tour remotely.
Respond to the visitor's remark using only the context below, confirming or gently correcting it. Then ask a short follow-up question about the exhibit.

[preamble.free_chat]
You are a guide robot in a geology museum, talking with a visitor who joins the tour remotely.
Chat with the visitor warmly and briefly, then steer the conversation back to the museum using the context below.

[preamble.proactive]
You are a guide robot in a geology museum, talking with a visitor who joins the tour remotely.
The visitor has been quiet for a while. Start a friendly social chat about the exhibit below and ask one easy question about it.

[exhibit]
Current stop:
{content}

[sample_dialogue]
Example exchange between the tour guide and a visitor at this exhibit:
{content}

[area]
Gallery the visitor is in:
{content}

[nearby]
Other exhibits nearby:
{content}

[history]
Exhibits already visited on this tour:
{content}

[utterance]
The visitor says:
{content}
";

const CONTEXT_SECTIONS: [&str; 6] = ["exhibit", "sample_dialogue", "area", "nearby", "history", "utterance"];
const PREAMBLES: [&str; 4] = [
    "preamble.inquiry_about_museum",
    "preamble.comment",
    "preamble.free_chat",
    "preamble.proactive",
];

/// Radius around a viewing pose within which the robot counts as at the exhibit.
pub const DOCK_RADIUS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("line {0}: text before the first [section]")]
    TextOutsideSection(usize),
    #[error("line {line}: unknown section [{name}]")]
    UnknownSection { line: usize, name: String },
    #[error("section [{0}] appears twice")]
    DuplicateSection(String),
    #[error("section [{0}] is missing")]
    MissingSection(String),
    #[error("section [{0}] must contain exactly one {{content}} placeholder")]
    Placeholder(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    preambles: [String; 4],
    /// (before, after) the placeholder, per context section.
    sections: [(String, String); 6],
}

impl Default for PromptTemplate {
    fn default() -> Self {
        PromptTemplate::parse(DEFAULT_TEMPLATE).expect("built-in template parses")
    }
}

impl PromptTemplate {
    pub fn parse(text: &str) -> Result<Self, TemplateError> {
        let mut blocks: Vec<(String, String)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.starts_with('[') && t.ends_with(']') && t.len() > 2 {
                let name = &t[1..t.len() - 1];
                if !PREAMBLES.contains(&name) && !CONTEXT_SECTIONS.contains(&name) {
                    return Err(TemplateError::UnknownSection {
                        line: i + 1,
                        name: name.to_string(),
                    });
                }
                if blocks.iter().any(|(n, _)| n == name) {
                    return Err(TemplateError::DuplicateSection(name.to_string()));
                }
                blocks.push((name.to_string(), String::new()));
            } else if let Some((_, body)) = blocks.last_mut() {
                body.push_str(line);
                body.push('\n');
            } else if !t.is_empty() {
                return Err(TemplateError::TextOutsideSection(i + 1));
            }
        }
        let take = |name: &str| -> Result<String, TemplateError> {
            blocks
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, b)| b.trim().to_string())
                .ok_or_else(|| TemplateError::MissingSection(name.to_string()))
        };
        let mut preambles: [String; 4] = Default::default();
        for (slot, name) in preambles.iter_mut().zip(PREAMBLES) {
            *slot = take(name)?;
        }
        let mut sections: [(String, String); 6] = Default::default();
        for (slot, name) in sections.iter_mut().zip(CONTEXT_SECTIONS) {
            let body = take(name)?;
            let mut parts = body.split("{content}");
            let before = parts.next().unwrap_or_default().to_string();
            let Some(after) = parts.next() else {
                return Err(TemplateError::Placeholder(name.to_string()));
            };
            if parts.next().is_some() {
                return Err(TemplateError::Placeholder(name.to_string()));
            }
            *slot = (before, after.to_string());
        }
        Ok(PromptTemplate { preambles, sections })
    }

    fn preamble(&self, kind: PromptKind) -> &str {
        &self.preambles[kind as usize]
    }
}

/// Which preamble a prompt uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptKind {
    Inquiry = 0,
    Comment = 1,
    FreeChat = 2,
    Proactive = 3,
}

impl PromptKind {
    pub fn for_intent(intent: Intent) -> Option<PromptKind> {
        match intent {
            Intent::InquiryAboutMuseum => Some(PromptKind::Inquiry),
            Intent::Comment => Some(PromptKind::Comment),
            Intent::FreeChat => Some(PromptKind::FreeChat),
            _ => None,
        }
    }
}

/// Everything a conversational handler sends to the language model.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptBundle {
    pub preamble: String,
    pub current_exhibit: Option<ExhibitId>,
    pub current_exhibit_intro: Option<String>,
    pub sample_dialogue: Option<String>,
    pub area_text: Option<String>,
    pub nearby_intros: Vec<String>,
    pub visit_history: Vec<(ExhibitId, String)>,
    pub user_utterance: String,
}

impl PromptBundle {
    /// Context sections in template order, without the utterance.
    fn context(&self) -> [Option<String>; 5] {
        let join = |v: &[String]| (!v.is_empty()).then(|| v.join("\n"));
        let history: Vec<String> = self
            .visit_history
            .iter()
            .map(|(id, name)| format!("Exhibit {id}, {name}"))
            .collect();
        [
            self.current_exhibit_intro.clone(),
            self.sample_dialogue.clone(),
            self.area_text.clone(),
            join(&self.nearby_intros),
            join(&history),
        ]
    }

    /// System text (preamble + context) and user text (utterance section).
    pub fn render_parts(&self, template: &PromptTemplate) -> (String, String) {
        let mut system = self.preamble.clone();
        for (content, (before, after)) in self.context().iter().zip(&template.sections) {
            if let Some(c) = content {
                system.push_str("\n\n");
                system.push_str(before);
                system.push_str(c);
                system.push_str(after);
            }
        }
        let (before, after) = &template.sections[5];
        let user = format!("{before}{}{after}", self.user_utterance);
        (system, user)
    }

    pub fn render(&self, template: &PromptTemplate) -> String {
        let (system, user) = self.render_parts(template);
        if self.user_utterance.is_empty() {
            system
        } else {
            format!("{system}\n\n{user}")
        }
    }
}

fn exhibit_line(e: &Exhibit) -> String {
    format!("Exhibit {}, {}: {}", e.id, e.name, e.intro.trim())
}

fn dialogue_text(e: &Exhibit) -> String {
    e.sample_dialogue
        .iter()
        .map(|t| {
            let who = match t.speaker {
                Speaker::Guide => "Tour Guide",
                Speaker::Visitor => "Visitor",
            };
            format!("{who}: {}", t.text.trim())
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// The exhibit the conversation is about: the navigation goal if there is
/// one, else the nearest same-area exhibit within [`DOCK_RADIUS`].
pub fn current_exhibit<'m>(map: &'m AnnotatedMap, robot: &RobotState) -> Option<&'m Exhibit> {
    if let Some(goal) = robot.goal_exhibit() {
        return map.exhibit(goal);
    }
    let pose = robot.pose();
    map.nearby_exhibits(&pose)
        .ok()?
        .into_iter()
        .next()
        .filter(|e| e.viewing_pose.distance(&pose) <= DOCK_RADIUS)
}

fn assemble(
    kind: PromptKind,
    focus: Option<&Exhibit>,
    utterance: &str,
    map: &AnnotatedMap,
    robot: &RobotState,
    visited: &[ExhibitId],
    template: &PromptTemplate,
) -> PromptBundle {
    let pose = robot.pose();
    let area_text = map.area_of(&pose).ok().map(|a| match &a.intro {
        Some(intro) => format!("{}. {}", a.name, intro.trim()),
        None => a.name.clone(),
    });
    let nearby_intros = map
        .nearby_exhibits(&pose)
        .unwrap_or_default()
        .into_iter()
        .filter(|e| Some(e.id) != focus.map(|f| f.id))
        .map(exhibit_line)
        .collect();
    let visit_history = visited
        .iter()
        .filter_map(|id| map.exhibit(*id))
        .map(|e| (e.id, e.name.clone()))
        .collect();
    PromptBundle {
        preamble: template.preamble(kind).to_string(),
        current_exhibit: focus.map(|e| e.id),
        current_exhibit_intro: focus.map(exhibit_line),
        sample_dialogue: focus.map(dialogue_text),
        area_text,
        nearby_intros,
        visit_history,
        user_utterance: utterance.trim().to_string(),
    }
}

/// Builds the prompt for a conversational intent; `None` for navigational ones.
pub fn build_prompt(
    intent: Intent,
    utterance: &str,
    map: &AnnotatedMap,
    robot: &RobotState,
    visited: &[ExhibitId],
    template: &PromptTemplate,
) -> Option<PromptBundle> {
    let kind = PromptKind::for_intent(intent)?;
    let focus = current_exhibit(map, robot);
    Some(assemble(kind, focus, utterance, map, robot, visited, template))
}

/// Social-chat prompt seeded with the nearest exhibit not yet visited.
pub(crate) fn build_proactive_prompt(
    map: &AnnotatedMap,
    robot: &RobotState,
    visited: &[ExhibitId],
    template: &PromptTemplate,
    cue: &str,
) -> PromptBundle {
    let pose = robot.pose();
    let focus = map
        .exhibits()
        .iter()
        .filter(|e| !visited.contains(&e.id))
        .min_by(|a, b| {
            a.viewing_pose
                .distance(&pose)
                .partial_cmp(&b.viewing_pose.distance(&pose))
                .unwrap_or(core::cmp::Ordering::Equal)
                .then(a.id.cmp(&b.id))
        })
        .or_else(|| current_exhibit(map, robot));
    assemble(PromptKind::Proactive, focus, cue, map, robot, visited, template)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose;
    use crate::navsim::plan_path;
    use crate::worldmap::testutil::two_rooms;

    #[test]
    fn inquiry_at_exhibit_has_all_sections_in_order() {
        let map = two_rooms();
        let t = PromptTemplate::default();
        let robot = RobotState::new(map.exhibit(4).unwrap().viewing_pose);
        let b = build_prompt(Intent::InquiryAboutMuseum, "What is this?", &map, &robot, &[7], &t).unwrap();
        assert_eq!(b.current_exhibit, Some(4));
        let text = b.render(&t);
        let e4 = map.exhibit(4).unwrap();
        let pos = |s: &str| text.find(s).unwrap_or_else(|| panic!("missing {s:?}"));
        let order = [
            pos(&b.preamble),
            pos(&e4.intro),
            pos(&e4.sample_dialogue[0].text),
            pos("Minerals gallery."),
            pos(&map.exhibit(7).unwrap().intro),
            pos("Exhibit 7, Galena\n").max(pos("already visited")),
            pos("What is this?"),
        ];
        assert!(order.windows(2).all(|w| w[0] < w[1]), "{order:?}");
        assert!(text.contains(&map.exhibit(9).unwrap().intro));
        assert!(!text.contains(&map.exhibit(13).unwrap().intro));
        assert_eq!(text.matches(&e4.intro).count(), 1);
        // Deterministic.
        let again = build_prompt(Intent::InquiryAboutMuseum, "What is this?", &map, &robot, &[7], &t).unwrap();
        assert_eq!(again.render(&t), text);
    }

    #[test]
    fn far_from_exhibits_has_no_exhibit_section() {
        let map = two_rooms();
        let t = PromptTemplate::default();
        let robot = RobotState::new(Pose::new(9.5, 3.5, 0.0));
        let b = build_prompt(Intent::FreeChat, "hi", &map, &robot, &[], &t).unwrap();
        assert!(b.current_exhibit_intro.is_none());
        assert!(b.sample_dialogue.is_none());
        assert_eq!(b.area_text.as_deref(), Some("Fossils"));
        let text = b.render(&t);
        assert!(!text.contains("Current stop:"));
        assert!(!text.contains("already visited"));
    }

    #[test]
    fn goal_exhibit_is_current_while_travelling() {
        let map = two_rooms();
        let start = Pose::new(9.5, 3.5, 0.0);
        let robot = RobotState::new(start).with_plan(plan_path(&map, start, 7).unwrap());
        let b = build_prompt(Intent::Comment, "nice", &map, &robot, &[], &PromptTemplate::default()).unwrap();
        assert_eq!(b.current_exhibit, Some(7));
        assert!(build_prompt(Intent::LowLevelControl, "x", &map, &robot, &[], &PromptTemplate::default()).is_none());
    }

    #[test]
    fn template_errors() {
        assert!(matches!(
            PromptTemplate::parse("hello\n[exhibit]\n{content}"),
            Err(TemplateError::TextOutsideSection(1))
        ));
        let missing = DEFAULT_TEMPLATE.replace("[history]", "[bogus]");
        assert!(matches!(PromptTemplate::parse(&missing), Err(TemplateError::UnknownSection { .. })));
        let twice = DEFAULT_TEMPLATE.replace("Other exhibits nearby:", "{content}");
        assert_eq!(PromptTemplate::parse(&twice), Err(TemplateError::Placeholder("nearby".into())));
        let cut = DEFAULT_TEMPLATE.split("[utterance]").next().unwrap();
        assert_eq!(PromptTemplate::parse(cut), Err(TemplateError::MissingSection("utterance".into())));
    }

    #[test]
    fn reskinned_template_changes_headers() {
        let t = PromptTemplate::parse(&DEFAULT_TEMPLATE.replace("Gallery the visitor is in:", "ZONE >>")).unwrap();
        let map = two_rooms();
        let robot = RobotState::new(Pose::new(1.0, 1.0, 0.0));
        let text = build_prompt(Intent::FreeChat, "hi", &map, &robot, &[], &t).unwrap().render(&t);
        assert!(text.contains("ZONE >>\nMinerals. Minerals gallery."));
    }
}
