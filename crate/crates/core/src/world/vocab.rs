//! Built-in household vocabulary: objects, the holder each belongs in, and
//! the room each holder usually stands in.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::spec::EntityKind;
use crate::knowledge::CommonsenseGraph;
use crate::policy::root_noun;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectEntry {
    pub concept: String,
    pub holder: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HolderEntry {
    pub phrase: String,
    pub kind: EntityKind,
    pub room: String,
}

/// Entities the generator draws from, partitioned into training objects and
/// held-out objects reserved for out-of-distribution games.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityVocabulary {
    pub objects: Vec<ObjectEntry>,
    pub holders: Vec<HolderEntry>,
    pub rooms: Vec<String>,
    pub adjectives: Vec<String>,
    pub held_out: BTreeSet<String>,
}

const ROOMS: &[&str] = &[
    "kitchen", "bedroom", "bathroom", "hallway", "study", "garage", "nursery", "pantry",
];

const ADJECTIVES: &[&str] = &[
    "brown", "blue", "red", "green", "white", "black", "yellow", "grey", "purple", "orange",
];

use EntityKind::{Container as C, Supporter as S};

const HOLDERS: &[(&str, EntityKind, &str)] = &[
    ("shoe cabinet", C, "hallway"),
    ("wardrobe", C, "bedroom"),
    ("refrigerator", C, "kitchen"),
    ("dishwasher", C, "kitchen"),
    ("laundry basket", C, "bathroom"),
    ("toolbox", C, "garage"),
    ("trash bin", C, "kitchen"),
    ("cutlery drawer", C, "kitchen"),
    ("medicine chest", C, "bathroom"),
    ("toy box", C, "nursery"),
    ("coat rack", S, "hallway"),
    ("dining table", S, "kitchen"),
    ("bookshelf", S, "study"),
    ("kitchen counter", S, "kitchen"),
    ("desk", S, "study"),
    ("nightstand", S, "bedroom"),
    ("towel rail", S, "bathroom"),
    ("bed", S, "bedroom"),
    ("workbench", S, "garage"),
    ("pantry shelf", S, "pantry"),
];

const OBJECTS: &[(&str, &str)] = &[
    ("golf shoe", "shoe cabinet"),
    ("moccasin", "shoe cabinet"),
    ("sandal", "shoe cabinet"),
    ("sneaker", "shoe cabinet"),
    ("dress", "wardrobe"),
    ("cardigan", "wardrobe"),
    ("necktie", "wardrobe"),
    ("milk carton", "refrigerator"),
    ("cheese", "refrigerator"),
    ("yogurt", "refrigerator"),
    ("dinner plate", "dishwasher"),
    ("soup bowl", "dishwasher"),
    ("coffee mug", "dishwasher"),
    ("sock", "laundry basket"),
    ("pajamas", "laundry basket"),
    ("undershirt", "laundry basket"),
    ("hammer", "toolbox"),
    ("screwdriver", "toolbox"),
    ("wrench", "toolbox"),
    ("pliers", "toolbox"),
    ("banana peel", "trash bin"),
    ("candy wrapper", "trash bin"),
    ("paper napkin", "trash bin"),
    ("fork", "cutlery drawer"),
    ("spoon", "cutlery drawer"),
    ("ladle", "cutlery drawer"),
    ("spatula", "cutlery drawer"),
    ("aspirin bottle", "medicine chest"),
    ("bandage", "medicine chest"),
    ("thermometer", "medicine chest"),
    ("teddy bear", "toy box"),
    ("rubber duck", "toy box"),
    ("yo-yo", "toy box"),
    ("raincoat", "coat rack"),
    ("scarf", "coat rack"),
    ("fedora", "coat rack"),
    ("candle", "dining table"),
    ("salt shaker", "dining table"),
    ("teapot", "dining table"),
    ("novel", "bookshelf"),
    ("dictionary", "bookshelf"),
    ("magazine", "bookshelf"),
    ("toaster", "kitchen counter"),
    ("kettle", "kitchen counter"),
    ("cutting board", "kitchen counter"),
    ("laptop", "desk"),
    ("stapler", "desk"),
    ("notebook", "desk"),
    ("alarm clock", "nightstand"),
    ("reading glasses", "nightstand"),
    ("lotion", "nightstand"),
    ("bath towel", "towel rail"),
    ("washcloth", "towel rail"),
    ("bathrobe", "towel rail"),
    ("pillow", "bed"),
    ("blanket", "bed"),
    ("duvet", "bed"),
    ("power drill", "workbench"),
    ("hand saw", "workbench"),
    ("tape measure", "workbench"),
    ("oatmeal", "pantry shelf"),
    ("flour sack", "pantry shelf"),
    ("jam jar", "pantry shelf"),
];

/// Nouns treated as containers when a vocabulary is derived from a bare
/// triple file, which carries no holder kinds.
const CONTAINER_NOUNS: &[&str] = &[
    "cabinet", "wardrobe", "refrigerator", "fridge", "dishwasher", "basket", "toolbox", "bin",
    "drawer", "chest", "box", "closet", "cupboard", "hamper", "can", "crate", "bag", "jar",
    "bucket", "case",
];

impl EntityVocabulary {
    pub fn builtin() -> EntityVocabulary {
        let objects: Vec<ObjectEntry> = OBJECTS
            .iter()
            .map(|(o, h)| ObjectEntry {
                concept: o.to_string(),
                holder: h.to_string(),
            })
            .collect();
        let held_out = hold_out(&objects);
        EntityVocabulary {
            objects,
            holders: HOLDERS
                .iter()
                .map(|(p, k, r)| HolderEntry {
                    phrase: p.to_string(),
                    kind: *k,
                    room: r.to_string(),
                })
                .collect(),
            rooms: ROOMS.iter().map(|r| r.to_string()).collect(),
            adjectives: ADJECTIVES.iter().map(|a| a.to_string()).collect(),
            held_out,
        }
    }

    /// Derives a vocabulary from `atlocation` triples. A triple whose subject
    /// is itself a holder is read as holder-to-room; everything else as
    /// object-to-holder. Holder kinds come from a list of container nouns.
    pub fn from_graph(graph: &CommonsenseGraph) -> EntityVocabulary {
        let triples: Vec<(&str, &str)> = graph.iter().map(|t| (t.subject(), t.object())).collect();
        let holder_names: BTreeSet<&str> = triples.iter().map(|(_, h)| *h).collect();
        let mut rooms: Vec<String> = ROOMS.iter().map(|r| r.to_string()).collect();
        let mut objects = Vec::new();
        let mut holder_room: Vec<(String, String)> = Vec::new();
        for (s, o) in &triples {
            if holder_names.contains(s) {
                holder_room.push((s.to_string(), o.to_string()));
                if !rooms.iter().any(|r| r == o) {
                    rooms.push(o.to_string());
                }
            } else {
                objects.push(ObjectEntry {
                    concept: s.to_string(),
                    holder: o.to_string(),
                });
            }
        }
        let mut holders: Vec<HolderEntry> = Vec::new();
        for entry in &objects {
            if holders.iter().any(|h| h.phrase == entry.holder) {
                continue;
            }
            let room = holder_room
                .iter()
                .find(|(h, _)| *h == entry.holder)
                .map(|(_, r)| r.clone())
                .unwrap_or_else(|| rooms[0].clone());
            let kind = match root_noun(&entry.holder) {
                Ok(n) if CONTAINER_NOUNS.contains(&n.as_str()) => EntityKind::Container,
                _ => EntityKind::Supporter,
            };
            holders.push(HolderEntry {
                phrase: entry.holder.clone(),
                kind,
                room,
            });
        }
        let held_out = hold_out(&objects);
        EntityVocabulary {
            objects,
            holders,
            rooms,
            adjectives: ADJECTIVES.iter().map(|a| a.to_string()).collect(),
            held_out,
        }
    }

    pub fn holder(&self, phrase: &str) -> Option<&HolderEntry> {
        self.holders.iter().find(|h| h.phrase == phrase)
    }

    pub fn train_objects(&self) -> impl Iterator<Item = &ObjectEntry> {
        self.objects
            .iter()
            .filter(|o| !self.held_out.contains(&o.concept))
    }

    pub fn held_out_objects(&self) -> impl Iterator<Item = &ObjectEntry> {
        self.objects
            .iter()
            .filter(|o| self.held_out.contains(&o.concept))
    }
}

// Every fourth object is held out (25%).
fn hold_out(objects: &[ObjectEntry]) -> BTreeSet<String> {
    objects
        .iter()
        .enumerate()
        .filter(|(i, _)| i % 4 == 3)
        .map(|(_, o)| o.concept.clone())
        .collect()
}
