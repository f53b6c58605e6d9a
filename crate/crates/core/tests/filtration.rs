//! Filtration on the published example questions for the triple
//! [Multiplayer, subClassOf, Achievement]. Expected outcomes come from
//! applying the shipped pattern tables to each question by hand.

use retrofit_cq::filtration::{CandidateCQ, Filter, FiltrationConfig, RemovalReason, Strictness};
use retrofit_cq::prompt::TemplateId;

fn run(template: TemplateId, qs: &[&str], cfg: &FiltrationConfig) -> Vec<Option<RemovalReason>> {
    let cands = qs
        .iter()
        .map(|q| CandidateCQ::new(*q, 0, template.clone(), "p"))
        .collect();
    Filter::new(cfg)
        .unwrap()
        .filter_candidates(cands)
        .into_iter()
        .map(|c| c.removal_reason)
        .collect()
}

use RemovalReason::{ModellingPrimitive as Prim, SubjectiveNarrative as Narr};

#[test]
fn gpt35_examples() {
    let cfg = FiltrationConfig::default();
    let p1 = [
        "What is a Multiplayer Achievement?",
        "What types of Achievements can be earned in a Multiplayer game?",
        "How do Multiplayer Achievements compare to Single Player Achievements?",
    ];
    assert_eq!(run(TemplateId::P1, &p1, &cfg), [None, None, None]);

    // Second-person questions about the reader's own play: all four match a
    // narrative pattern ("do you use" twice, "how do you measure your",
    // "what do you do to").
    let p2 = [
        "What strategies do you use to succeed in multiplayer games?",
        "What techniques do you use to maximize your achievements in multiplayer games?",
        "How do you measure your progress in multiplayer games?",
        "What do you do to stay ahead of the competition in multiplayer games?",
    ];
    assert_eq!(run(TemplateId::P2, &p2, &cfg), [Some(Narr); 4]);

    let p3 = [
        "What is the definition of a Multiplayer Achievement?",
        "How does a Multiplayer Achievement differ from a single-player Achievement?",
        "What strategies can be used to successfully complete a Multiplayer Achievement?",
        "How can Multiplayer Achievements be tracked and monitored?",
    ];
    assert_eq!(run(TemplateId::P3, &p3, &cfg), [None, None, None, None]);
}

#[test]
fn gpt4_examples() {
    let cfg = FiltrationConfig::default();
    let p1 = [
        "How is the multiplayer mode categorized under achievements?",
        "What are the achievements specific to the multiplayer category?",
        "Does every multiplayer game have its own set of achievements?",
        "What is the relationship between a \"multiplayer\" and an \"achievement\" in this context?",
    ];
    assert_eq!(run(TemplateId::P1, &p1, &cfg), [None; 4]);
    let p2 = [
        "What class does Multiplayer belong to?",
        "Does the Achievement have any subclasses?",
        "What is the relationship between Multiplayer and Achievement?",
    ];
    assert_eq!(run(TemplateId::P2, &p2, &cfg), [Some(Prim), Some(Prim), None]);
    let p3 = [
        "What is the subclass of Multiplayer?",
        "Which concepts are subclass of Achievement?",
        "Is there a hierarchical relationship between Multiplayer and Achievement?",
        "What specific class is under the Achievement class in the ontology?",
    ];
    assert_eq!(run(TemplateId::P3, &p3, &cfg), [Some(Prim); 4]);
}

#[test]
fn llama_examples_and_strictness() {
    let qs = [
        "What are some common multiplayer game modes that can be considered subclasses of achievements?",
        "How do multiplayer games typically incorporate achievements into their gameplay mechanics?",
        "Can you name an example of a multiplayer game that has a strong focus on achievements and describe how they are used in the game?",
        "How do achievements in multiplayer games differ from those in single-player games?",
        "In what ways can multiplayer games use achievements to encourage player engagement and competition?",
    ];
    let lenient = FiltrationConfig::default();
    assert_eq!(run(TemplateId::P2, &qs, &lenient), [None, None, Some(Narr), None, None]);
    let strict = FiltrationConfig {
        strictness: Strictness::Strict,
        ..Default::default()
    };
    assert_eq!(
        run(TemplateId::P2, &qs, &strict),
        [Some(Prim), None, Some(Narr), None, None]
    );
    let off = FiltrationConfig {
        strictness: Strictness::Off,
        ..Default::default()
    };
    assert_eq!(run(TemplateId::P2, &qs, &off), [None; 5]);

    let design = ["Can you design a multiplayer game mode that incorporates achievements as rewards for collaboration and teamwork?"];
    assert_eq!(run(TemplateId::P3, &design, &lenient), [Some(Narr)]);
    let two = ["How do players typically earn this achievement in the game? Are there specific requirements or challenges that must be completed?"];
    assert_eq!(run(TemplateId::P1, &two, &lenient), [Some(Narr)]);
}

#[test]
fn verbatim_removal_examples() {
    let cfg = FiltrationConfig::default();
    let qs = [
        "Is Multiplayer a class?",
        "Could you envision a future where multiplayer games abandon traditional achievements in favour of more dynamic, player-driven goals and objectives? Why or why not?",
    ];
    assert_eq!(run(TemplateId::P1, &qs, &cfg), [Some(Prim), Some(Narr)]);
}

#[test]
fn precedence_and_malformed() {
    let cfg = FiltrationConfig::default();
    let qs = [
        "Is Multiplayer a class?",
        "Is multiplayer a class?",
        "Tell me about multiplayer.",
        "?",
    ];
    assert_eq!(
        run(TemplateId::P1, &qs, &cfg),
        [
            Some(Prim),
            Some(RemovalReason::Duplicate),
            Some(RemovalReason::Malformed),
            Some(RemovalReason::Malformed)
        ]
    );
    assert!(run(TemplateId::P1, &[], &cfg).is_empty());
}
