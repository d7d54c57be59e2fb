//! Deterministic synthetic data: clustered concept corpora, a dataless task
//! whose labels and instances share no concept ids, and the bundled mini
//! corpus.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boc::SparseBoc;
use crate::corpus::{AnnotatedDocument, Token};
use crate::error::Result;
use crate::eval::{DatalessTask, Instance};

/// Shape of a clustered corpus. Each document draws from one cluster.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterSpec {
    pub clusters: usize,
    pub concepts_per_cluster: usize,
    pub words_per_cluster: usize,
    pub documents: usize,
    pub doc_len: usize,
    /// Probability that a token is a concept mention.
    pub mention_rate: f64,
    /// Probability that a token comes from a random cluster.
    pub noise: f64,
    pub seed: u64,
}

impl Default for ClusterSpec {
    fn default() -> Self {
        ClusterSpec {
            clusters: 3,
            concepts_per_cluster: 10,
            words_per_cluster: 20,
            documents: 4000,
            doc_len: 50,
            mention_rate: 0.5,
            noise: 0.05,
            seed: 42,
        }
    }
}

impl ClusterSpec {
    pub fn concept(&self, cluster: usize, index: usize) -> String {
        format!("k{cluster}_c{index}")
    }

    pub fn concepts(&self, cluster: usize) -> Vec<String> {
        (0..self.concepts_per_cluster)
            .map(|i| self.concept(cluster, i))
            .collect()
    }

    pub fn cluster_of(&self, concept: &str) -> Option<usize> {
        concept.strip_prefix('k')?.split('_').next()?.parse().ok()
    }

    pub fn total_tokens(&self) -> usize {
        self.documents * self.doc_len
    }
}

pub fn cluster_corpus(spec: &ClusterSpec) -> Vec<AnnotatedDocument> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.documents)
        .map(|d| {
            let home = rng.random_range(0..spec.clusters);
            let tokens = (0..spec.doc_len)
                .map(|_| {
                    let cluster = if rng.random_bool(spec.noise) {
                        rng.random_range(0..spec.clusters)
                    } else {
                        home
                    };
                    if rng.random_bool(spec.mention_rate) {
                        Token::Concept(
                            spec.concept(cluster, rng.random_range(0..spec.concepts_per_cluster)),
                        )
                    } else {
                        Token::Word(format!(
                            "w{cluster}x{}",
                            rng.random_range(0..spec.words_per_cluster)
                        ))
                    }
                })
                .collect();
            AnnotatedDocument {
                doc_id: format!("d{d}"),
                tokens,
            }
        })
        .collect()
}

/// Two-class task over clusters 0 and 1. Label BOCs use the first half of a
/// cluster's concepts and instance BOCs the second half, so no instance
/// shares a concept id with any label.
pub fn disjoint_dataless_task(
    spec: &ClusterSpec,
    instances_per_class: usize,
    seed: u64,
) -> Result<DatalessTask> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = spec.concepts_per_cluster / 2;
    let mut random_boc = |cluster: usize, range: std::ops::Range<usize>| {
        let mut ids: Vec<usize> = range.collect();
        ids.shuffle(&mut rng);
        let take = rng.random_range(1..=ids.len());
        SparseBoc::new(
            ids[..take]
                .iter()
                .map(|&i| (spec.concept(cluster, i), rng.random_range(0.1..10.0)))
                .collect::<Vec<_>>(),
        )
    };
    let mut labels = Vec::new();
    for class in 0..2 {
        labels.push((format!("cluster{class}"), random_boc(class, 0..half)?));
    }
    let mut instances = Vec::new();
    for i in 0..instances_per_class {
        for class in 0..2 {
            instances.push(Instance {
                id: format!("i{class}_{i}"),
                boc: random_boc(class, half..spec.concepts_per_cluster)?,
                gold: class,
            });
        }
    }
    DatalessTask::new(labels, instances)
}

/// Topic name, then its words. The first word names the topic; the next
/// 28 form four subtopics of seven.
const TOPICS: [(&str, [&str; 30]); 6] = [
    (
        "rec.sport.hockey",
        [
            "hockey",
            "puck",
            "goalie",
            "skate",
            "rink",
            "stick",
            "ice",
            "slapshot",
            "defenseman",
            "faceoff",
            "penalty",
            "powerplay",
            "winger",
            "zamboni",
            "playoff",
            "stanley",
            "cup",
            "overtime",
            "shutout",
            "crease",
            "boards",
            "blueline",
            "icing",
            "offside",
            "captain",
            "coach",
            "roster",
            "trade",
            "draft",
            "arena",
        ],
    ),
    (
        "rec.autos",
        [
            "car",
            "engine",
            "sedan",
            "coupe",
            "transmission",
            "clutch",
            "gearbox",
            "brake",
            "tire",
            "wheel",
            "dealer",
            "warranty",
            "mileage",
            "horsepower",
            "torque",
            "radiator",
            "piston",
            "camshaft",
            "exhaust",
            "muffler",
            "bumper",
            "chassis",
            "windshield",
            "ignition",
            "carburetor",
            "diesel",
            "gasoline",
            "odometer",
            "sunroof",
            "convertible",
        ],
    ),
    (
        "rec.motorcycles",
        [
            "motorcycle",
            "bike",
            "helmet",
            "rider",
            "throttle",
            "handlebar",
            "sidecar",
            "chopper",
            "saddle",
            "kickstand",
            "fairing",
            "swingarm",
            "sprocket",
            "chain",
            "leathers",
            "wheelie",
            "countersteer",
            "lane",
            "splitting",
            "touring",
            "cruiser",
            "sportbike",
            "dirtbike",
            "scrambler",
            "visor",
            "gloves",
            "boots",
            "ride",
            "biker",
            "rally",
        ],
    ),
    (
        "talk.politics.guns",
        [
            "gun",
            "firearm",
            "rifle",
            "pistol",
            "handgun",
            "ammunition",
            "cartridge",
            "caliber",
            "holster",
            "trigger",
            "magazine",
            "shotgun",
            "revolver",
            "permit",
            "license",
            "militia",
            "amendment",
            "background",
            "check",
            "registration",
            "waiting",
            "period",
            "concealed",
            "carry",
            "range",
            "marksman",
            "hunting",
            "ban",
            "lobby",
            "ownership",
        ],
    ),
    (
        "talk.politics.mideast",
        [
            "mideast",
            "israel",
            "palestine",
            "jerusalem",
            "gaza",
            "lebanon",
            "syria",
            "jordan",
            "egypt",
            "arab",
            "settlement",
            "occupation",
            "ceasefire",
            "treaty",
            "negotiation",
            "refugee",
            "border",
            "territory",
            "intifada",
            "diplomat",
            "embassy",
            "sanctions",
            "resolution",
            "conflict",
            "peace",
            "accord",
            "summit",
            "envoy",
            "armistice",
            "partition",
        ],
    ),
    (
        "soc.religion.christian",
        [
            "church",
            "christian",
            "gospel",
            "bible",
            "scripture",
            "prayer",
            "faith",
            "salvation",
            "grace",
            "sermon",
            "pastor",
            "baptism",
            "communion",
            "resurrection",
            "apostle",
            "disciple",
            "parable",
            "psalm",
            "hymn",
            "congregation",
            "worship",
            "sin",
            "repentance",
            "heaven",
            "trinity",
            "sacrament",
            "epistle",
            "covenant",
            "prophet",
            "theology",
        ],
    ),
];

const FILLER: [&str; 40] = [
    "the", "of", "and", "a", "to", "in", "is", "that", "it", "was", "for", "on", "are", "with",
    "as", "this", "be", "at", "by", "from", "or", "have", "an", "they", "which", "one", "you",
    "had", "but", "not", "what", "all", "were", "when", "we", "there", "can", "more", "about",
    "some",
];

pub const MINI_CONCEPTS_PER_SUBTOPIC: usize = 10;
const SUBTOPICS: usize = 4;

/// Files of the bundled mini corpus, as text.
#[derive(Clone, Debug, PartialEq)]
pub struct MiniBundle {
    /// Annotated corpus, one article per concept.
    pub corpus: String,
    /// `alias<TAB>target` lines.
    pub redirects: String,
    /// `label_name<TAB>text` lines.
    pub label_texts: String,
    /// `instance_id<TAB>text` lines.
    pub instance_texts: String,
    /// `instance_id<TAB>label_name` lines.
    pub gold: String,
    /// `query_id<TAB>candidate_id<TAB>0|1` lines.
    pub relatedness: String,
}

struct MiniConcept {
    id: String,
    topic: usize,
    subtopic: usize,
    surface: String,
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    c.next()
        .map(|f| f.to_uppercase().chain(c).collect())
        .unwrap_or_default()
}

fn mini_concepts(rng: &mut ChaCha8Rng) -> Vec<MiniConcept> {
    let mut out = Vec::new();
    for (t, (_, words)) in TOPICS.iter().enumerate() {
        for g in 0..SUBTOPICS {
            let group = &words[1 + g * 7..1 + (g + 1) * 7];
            let mut pairs: Vec<(usize, usize)> = (0..7)
                .flat_map(|a| (0..7).map(move |b| (a, b)))
                .filter(|(a, b)| a != b)
                .collect();
            pairs.shuffle(rng);
            let mut used = BTreeSet::new();
            for (a, b) in pairs {
                if used.len() == MINI_CONCEPTS_PER_SUBTOPIC {
                    break;
                }
                if used.insert((a.min(b), a.max(b))) {
                    out.push(MiniConcept {
                        id: format!("{}_{}", capitalize(group[a]), group[b]),
                        topic: t,
                        subtopic: g,
                        surface: format!("{} {}", group[a], group[b]),
                    });
                }
            }
        }
    }
    out
}

pub fn mini_topics() -> Vec<&'static str> {
    TOPICS.iter().map(|(name, _)| *name).collect()
}

/// Generates the mini corpus deterministically from `seed`.
pub fn mini_bundle(seed: u64) -> MiniBundle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let concepts = mini_concepts(&mut rng);
    let per_topic = SUBTOPICS * MINI_CONCEPTS_PER_SUBTOPIC;

    // Every fifth concept gets an alias; every tenth a two-step chain.
    let mut redirects = String::new();
    let mut aliases: Vec<Vec<String>> = vec![Vec::new(); concepts.len()];
    for (i, c) in concepts.iter().enumerate() {
        if i % 5 == 0 {
            let alias = format!("{}_(topic)", c.id);
            writeln!(redirects, "{alias}\t{}", c.id).unwrap();
            aliases[i].push(alias.clone());
            if i % 10 == 0 {
                let outer = c.id.replace('_', "");
                writeln!(redirects, "{outer}\t{alias}").unwrap();
                aliases[i].push(outer);
            }
        }
    }

    let mut corpus = String::new();
    for (i, c) in concepts.iter().enumerate() {
        let words = &TOPICS[c.topic].1;
        let group = &words[1 + c.subtopic * 7..1 + (c.subtopic + 1) * 7];
        let (first, second) = c.surface.split_once(' ').unwrap();
        writeln!(corpus, "#doc {}", c.id).unwrap();
        for _ in 0..rng.random_range(38..46) {
            let mut line: Vec<String> = Vec::new();
            for _ in 0..rng.random_range(8..16) {
                let roll: f64 = rng.random();
                let token = if roll < 0.16 {
                    let r: f64 = rng.random();
                    let j = if r < 0.6 {
                        c.topic * per_topic
                            + c.subtopic * MINI_CONCEPTS_PER_SUBTOPIC
                            + rng.random_range(0..MINI_CONCEPTS_PER_SUBTOPIC)
                    } else if r < 0.9 {
                        c.topic * per_topic + rng.random_range(0..per_topic)
                    } else {
                        rng.random_range(0..concepts.len())
                    };
                    let target = &concepts[j];
                    let id = match aliases[j].choose(&mut rng) {
                        Some(a) if rng.random_bool(0.3) => a.as_str(),
                        _ => target.id.as_str(),
                    };
                    format!("[[{id}|{}]]", target.surface)
                } else if roll < 0.30 {
                    (*[first, second].choose(&mut rng).unwrap()).to_owned()
                } else if roll < 0.45 {
                    (*group.choose(&mut rng).unwrap()).to_owned()
                } else if roll < 0.55 {
                    (*words.choose(&mut rng).unwrap()).to_owned()
                } else if roll < 0.57 {
                    (*TOPICS.choose(&mut rng).unwrap().1.choose(&mut rng).unwrap()).to_owned()
                } else {
                    (*FILLER.choose(&mut rng).unwrap()).to_owned()
                };
                line.push(token);
            }
            writeln!(corpus, "{}.", line.join(" ")).unwrap();
        }
        if i + 1 < concepts.len() {
            corpus.push('\n');
        }
    }

    let mut label_texts = String::new();
    for (name, words) in &TOPICS {
        let mut text = vec![words[0]];
        for g in 0..SUBTOPICS {
            text.push(words[1 + g * 7 + rng.random_range(0..7)]);
        }
        writeln!(label_texts, "{name}\t{}", text.join(" ")).unwrap();
    }

    let mut instance_texts = String::new();
    let mut gold = String::new();
    for (t, (name, words)) in TOPICS.iter().enumerate() {
        for k in 0..30 {
            let id = format!("{}-{k:02}", name.rsplit('.').next().unwrap());
            let text: Vec<&str> = (0..rng.random_range(25..45))
                .map(|_| {
                    let roll: f64 = rng.random();
                    if roll < 0.45 {
                        *words.choose(&mut rng).unwrap()
                    } else if roll < 0.55 {
                        *TOPICS.choose(&mut rng).unwrap().1.choose(&mut rng).unwrap()
                    } else {
                        *FILLER.choose(&mut rng).unwrap()
                    }
                })
                .collect();
            writeln!(instance_texts, "{id}\t{}", text.join(" ")).unwrap();
            writeln!(gold, "{id}\t{}", TOPICS[t].0).unwrap();
        }
    }

    let mut relatedness = String::new();
    for t in 0..TOPICS.len() {
        for g in 0..SUBTOPICS {
            let base = t * per_topic + g * MINI_CONCEPTS_PER_SUBTOPIC;
            let q = base + rng.random_range(0..MINI_CONCEPTS_PER_SUBTOPIC);
            let query = &concepts[q].id;
            let related: Vec<usize> = (base..base + MINI_CONCEPTS_PER_SUBTOPIC)
                .filter(|&j| j != q)
                .collect();
            let mut cands: Vec<(String, bool)> = related
                .choose_multiple(&mut rng, 5)
                .map(|&j| (concepts[j].id.clone(), true))
                .collect();
            let same_topic: Vec<usize> = (t * per_topic..(t + 1) * per_topic)
                .filter(|j| !(base..base + MINI_CONCEPTS_PER_SUBTOPIC).contains(j))
                .collect();
            let other: Vec<usize> = (0..concepts.len())
                .filter(|j| concepts[*j].topic != t)
                .collect();
            for &j in same_topic
                .choose_multiple(&mut rng, 5)
                .chain(other.choose_multiple(&mut rng, 5))
            {
                cands.push((concepts[j].id.clone(), false));
            }
            if g == 0 {
                cands.push((format!("Unseen_entity_{t}"), false));
            }
            cands.shuffle(&mut rng);
            for (c, r) in cands {
                writeln!(relatedness, "{query}\t{c}\t{}", u8::from(r)).unwrap();
            }
        }
    }
    writeln!(relatedness, "Unseen_query\t{}\t1", concepts[0].id).unwrap();

    MiniBundle {
        corpus,
        redirects,
        label_texts,
        instance_texts,
        gold,
        relatedness,
    }
}

/// Category map for the mini corpus topics, following the 20NG grouping.
pub const CATEGORIES_20NG: &str = "\
rec.sport.hockey\tsport
rec.sport.baseball\tsport
rec.autos\tsport
rec.motorcycles\tsport
talk.politics.guns\tpolitics
talk.politics.mideast\tpolitics
talk.politics.misc\tpolitics
soc.religion.christian\treligion
alt.atheism\treligion
talk.religion.misc\treligion
";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_corpus, RedirectMap};
    use std::collections::HashSet;

    #[test]
    fn cluster_corpus_shape() {
        let spec = ClusterSpec {
            documents: 20,
            ..Default::default()
        };
        let docs = cluster_corpus(&spec);
        assert_eq!(docs.len(), 20);
        assert!(docs.iter().all(|d| d.tokens.len() == spec.doc_len));
        assert_eq!(docs, cluster_corpus(&spec));
        assert_eq!(spec.cluster_of("k2_c7"), Some(2));
    }

    #[test]
    fn disjoint_task_shares_no_ids() {
        let spec = ClusterSpec::default();
        let task = disjoint_dataless_task(&spec, 10, 3).unwrap();
        let label_ids: HashSet<&str> = task
            .labels()
            .iter()
            .flat_map(|(_, b)| b.entries().iter().map(|(c, _)| c.as_str()))
            .collect();
        for i in task.instances() {
            assert!(i
                .boc
                .entries()
                .iter()
                .all(|(c, _)| !label_ids.contains(c.as_str())));
            assert!(i
                .boc
                .entries()
                .iter()
                .all(|(c, _)| spec.cluster_of(c) == Some(i.gold)));
        }
    }

    #[test]
    fn mini_bundle_parses() {
        let bundle = mini_bundle(7);
        assert_eq!(bundle, mini_bundle(7));
        let redirects = RedirectMap::read_tsv(bundle.redirects.as_bytes(), "redirects").unwrap();
        let parsed = parse_corpus(bundle.corpus.as_bytes(), &redirects, "corpus").unwrap();
        assert_eq!(
            parsed.documents.len(),
            TOPICS.len() * SUBTOPICS * MINI_CONCEPTS_PER_SUBTOPIC
        );
        let ids: HashSet<&str> = parsed.documents.iter().map(|d| d.doc_id.as_str()).collect();
        for d in &parsed.documents {
            for t in &d.tokens {
                if let Token::Concept(c) = t {
                    assert!(
                        ids.contains(c.as_str()),
                        "{c} does not resolve to an article"
                    );
                }
            }
        }
        assert_eq!(bundle.gold.lines().count(), 180);
    }
}
