//! Hand-written symptom material for the synthetic world.
//!
//! Clause templates use a tiny grammar so the same clause can be rendered in
//! first or third person:
//!
//! * `{S}` subject (`i` / `she`), `{P}` possessive (`my` / `her`),
//!   `{O}` object (`me` / `her`)
//! * `[a/b]` picks `a` in first person and `b` in third person

pub(crate) struct SymptomMaterial {
    pub id: &'static str,
    pub name: &'static str,
    /// Clinical terms; the keyword lexicon for this symptom.
    pub keywords: &'static [&'static str],
    /// Manual / questionnaire descriptions.
    pub manual: &'static [&'static str],
    pub questionnaire: &'static [&'static str],
    /// Clauses that contain at least one keyword.
    pub keyword_clauses: &'static [&'static str],
    /// Clauses that avoid every keyword.
    pub paraphrase_clauses: &'static [&'static str],
    /// How many of the paraphrase clauses are also stored as post-sourced
    /// sub-symptom descriptions in the graph.
    pub post_examples: usize,
}

pub(crate) struct DiseaseMaterial {
    pub id: &'static str,
    pub name: &'static str,
    pub symptoms: &'static [&'static str],
    /// Keywords used by the diagnosis rule.
    pub diagnosis_keywords: &'static [&'static str],
    /// Topic words typical of the disease's forum.
    pub context_words: &'static [&'static str],
}

pub(crate) const SYMPTOMS: &[SymptomMaterial] = &[
    SymptomMaterial {
        id: "depressed_mood",
        name: "Depressed Mood",
        keywords: &["depressed", "depression"],
        manual: &["depressed mood most of the day nearly every day"],
        questionnaire: &["feeling down depressed or hopeless"],
        keyword_clauses: &[
            "{S} [feel/feels] so depressed lately",
            "{P} depression is getting worse every week",
        ],
        paraphrase_clauses: &[
            "{S} [feel/feels] empty and hopeless all the time",
            "{S} [cry/cries] every day for no reason",
            "everything feels grey and heavy to {O}",
            "{S} [feel/feels] sad and down most days",
        ],
        post_examples: 4,
    },
    SymptomMaterial {
        id: "loss_of_interest",
        name: "Loss of Interest",
        keywords: &["interest", "anhedonia"],
        manual: &["markedly diminished interest or pleasure in all activities"],
        questionnaire: &["little interest or pleasure in doing things"],
        keyword_clauses: &[
            "{S} [have/has] lost interest in everything",
            "{S} [have/has] no interest in seeing friends",
        ],
        paraphrase_clauses: &[
            "nothing is fun for {O} anymore",
            "{S} [don't/doesn't] enjoy {P} hobbies anymore",
            "{S} stopped caring about the games {S} used to love",
            "music and movies do nothing for {O} now",
        ],
        post_examples: 4,
    },
    SymptomMaterial {
        id: "sleep_disturbance",
        name: "Sleep Disturbance",
        keywords: &["insomnia", "sleep"],
        manual: &["insomnia or hypersomnia nearly every day"],
        questionnaire: &["trouble falling or staying asleep or sleeping too much"],
        keyword_clauses: &[
            "{S} can't sleep at night",
            "{P} insomnia is killing {O}",
        ],
        paraphrase_clauses: &[
            "{S} [lie/lies] awake for hours every night",
            "{S} [wake/wakes] up at four and can't drift off again",
            "{S} [stay/stays] up all night staring at the ceiling",
            "{S} [toss/tosses] and [turn/turns] in bed until dawn",
        ],
        post_examples: 4,
    },
    SymptomMaterial {
        id: "fatigue",
        name: "Fatigue",
        keywords: &["tired", "fatigue", "exhausted"],
        manual: &["fatigue or loss of energy nearly every day"],
        questionnaire: &["feeling tired or having little energy"],
        keyword_clauses: &[
            "{S} [am/is] always tired",
            "the fatigue never goes away for {O}",
        ],
        paraphrase_clauses: &[
            "{S} [have/has] no energy to get out of bed",
            "even a shower drains all {P} energy",
            "{S} [feel/feels] drained and worn out all day",
            "{P} body feels like lead from morning to night",
        ],
        post_examples: 4,
    },
    SymptomMaterial {
        id: "suicidal_ideas",
        name: "Suicidal Ideas",
        keywords: &["suicide", "suicidal", "kill"],
        manual: &["recurrent thoughts of death and recurrent suicidal ideation"],
        questionnaire: &["thoughts that you would be better off dead"],
        keyword_clauses: &[
            "{S} [have/has] suicidal thoughts again",
            "{S} [think/thinks] about suicide a lot",
        ],
        paraphrase_clauses: &[
            "{S} [think/thinks] everyone would be better off without {O}",
            "{S} [wish/wishes] {S} could just disappear forever",
            "{S} [don't/doesn't] want to be alive anymore",
            "{S} [write/writes] goodbye letters in {P} head",
        ],
        post_examples: 4,
    },
    SymptomMaterial {
        id: "obsession",
        name: "Obsession",
        keywords: &["obsessive", "obsession", "intrusive"],
        manual: &["recurrent and persistent thoughts urges or images that are intrusive and unwanted"],
        questionnaire: &["unpleasant thoughts that keep entering your mind against your will"],
        keyword_clauses: &[
            "{S} [have/has] intrusive thoughts all the time",
            "the obsessive thoughts never stop for {O}",
        ],
        paraphrase_clauses: &[
            "{S} can't stop thinking about germs on everything",
            "the same awful thought loops in {P} head all day",
            "{S} [fear/fears] constantly that the stove is still on",
            "{S} [am/is] haunted by the idea of hurting someone",
        ],
        post_examples: 4,
    },
    SymptomMaterial {
        id: "compulsion",
        name: "Compulsion",
        keywords: &["compulsive", "compulsion", "compulsions", "ritual", "rituals"],
        manual: &["repetitive behaviors the person feels driven to perform in response to an obsession"],
        questionnaire: &["having to check things over and over again"],
        keyword_clauses: &[
            "{P} compulsions take hours every day",
            "{S} [do/does] compulsive checking rituals",
        ],
        paraphrase_clauses: &[
            "{S} [wash/washes] {P} hands until they bleed",
            "{S} [check/checks] the locks ten times before leaving",
            "{S} [have/has] to count every step in fours",
            "{S} [line/lines] up the cups until they look exactly right",
        ],
        post_examples: 4,
    },
    SymptomMaterial {
        id: "anxious_mood",
        name: "Anxious Mood",
        keywords: &["anxiety", "anxious", "nervous"],
        manual: &["excessive anxiety and worry occurring more days than not"],
        questionnaire: &["feeling nervous anxious or on edge"],
        keyword_clauses: &[
            "{P} anxiety is through the roof",
            "{S} [feel/feels] anxious and nervous all day",
        ],
        paraphrase_clauses: &[
            "{S} [feel/feels] tense and on edge all the time",
            "{P} stomach is in knots about everything",
            "{S} can't relax and always [expect/expects] the worst",
            "{S} [dread/dreads] every phone call and email",
        ],
        post_examples: 4,
    },
    SymptomMaterial {
        id: "panic_attack",
        name: "Panic Attack",
        keywords: &["panic"],
        manual: &["recurrent unexpected panic attacks with pounding heart and fear of dying"],
        questionnaire: &["sudden episodes of intense fear with a racing heart"],
        keyword_clauses: &[
            "{S} had another panic attack today",
            "the panic hits {O} out of nowhere",
        ],
        paraphrase_clauses: &[
            "{P} heart pounds and {S} can't breathe out of nowhere",
            "{S} suddenly [feel/feels] like {S} [am/is] dying in the supermarket",
            "{S} [get/gets] chest pain and shaking spells in crowds",
            "{S} had to run out of class gasping for air",
        ],
        post_examples: 4,
    },
    SymptomMaterial {
        id: "intrusive_memory",
        name: "Intrusive Memory",
        keywords: &["flashback", "flashbacks", "trauma"],
        manual: &["recurrent involuntary and distressing memories of the traumatic event"],
        questionnaire: &["repeated disturbing memories of a stressful experience"],
        keyword_clauses: &[
            "{S} [get/gets] flashbacks of the trauma",
            "the trauma memories come back to {O} constantly",
        ],
        paraphrase_clauses: &[
            "{S} [keep/keeps] reliving the accident in vivid detail",
            "the night of the attack replays in {P} mind",
            "{S} [have/has] nightmares about what happened to {O}",
            "a car horn throws {O} right back to that day",
        ],
        post_examples: 4,
    },
    SymptomMaterial {
        id: "avoid_stimuli",
        name: "Avoid Stimuli",
        keywords: &["avoid", "avoiding"],
        manual: &["avoidance of external reminders that arouse distressing memories"],
        questionnaire: &["avoiding activities or situations because they remind you of a stressful experience"],
        keyword_clauses: &[
            "{S} [avoid/avoids] places that remind {O} of it",
            "{S} [keep/keeps] avoiding the news",
        ],
        paraphrase_clauses: &[
            "{S} [stay/stays] away from anything that reminds {O} of that day",
            "{S} can't drive past that street anymore",
            "{S} [refuse/refuses] to talk about what happened",
            "{S} [skip/skips] every event where that crowd might be",
        ],
        post_examples: 4,
    },
    SymptomMaterial {
        id: "mood_swing",
        name: "Mood Swing",
        keywords: &["manic", "mania", "swings"],
        manual: &["a distinct period of abnormally elevated expansive or irritable mood"],
        questionnaire: &["periods of feeling so high that others thought you were not your normal self"],
        keyword_clauses: &[
            "{S} [have/has] crazy mood swings",
            "{S} [think/thinks] {S} [am/is] manic again",
        ],
        paraphrase_clauses: &[
            "one day {S} [am/is] on top of the world and the next {S} [am/is] crashing",
            "{S} [spend/spends] all {P} savings in a wild burst of energy",
            "{S} [go/goes] days without rest feeling unstoppable",
            "{P} highs are followed by terrible lows",
        ],
        post_examples: 4,
    },
];

pub(crate) const DISEASES: &[DiseaseMaterial] = &[
    DiseaseMaterial {
        id: "depression",
        name: "Depression",
        symptoms: &["depressed_mood", "loss_of_interest", "sleep_disturbance", "fatigue", "suicidal_ideas"],
        diagnosis_keywords: &["depression", "mdd", "major depressive disorder"],
        context_words: &["therapist", "meds", "sertraline", "weekend", "job", "winter"],
    },
    DiseaseMaterial {
        id: "anxiety",
        name: "Anxiety",
        symptoms: &["sleep_disturbance", "fatigue", "anxious_mood", "panic_attack"],
        diagnosis_keywords: &["anxiety", "gad", "panic disorder"],
        context_words: &["exam", "interview", "presentation", "deadline", "breathing", "counselor"],
    },
    DiseaseMaterial {
        id: "ocd",
        name: "OCD",
        symptoms: &["obsession", "compulsion", "anxious_mood"],
        diagnosis_keywords: &["ocd", "obsessive compulsive disorder"],
        context_words: &["kitchen", "door", "stove", "soap", "germs", "routine"],
    },
    DiseaseMaterial {
        id: "ptsd",
        name: "PTSD",
        symptoms: &["sleep_disturbance", "anxious_mood", "intrusive_memory", "avoid_stimuli"],
        diagnosis_keywords: &["ptsd", "post traumatic stress"],
        context_words: &["veteran", "accident", "deployment", "noise", "therapy", "memories"],
    },
    DiseaseMaterial {
        id: "bipolar",
        name: "Bipolar",
        symptoms: &["depressed_mood", "sleep_disturbance", "fatigue", "mood_swing"],
        diagnosis_keywords: &["bipolar", "bipolar disorder"],
        context_words: &["lithium", "episode", "psychiatrist", "spending", "cycle", "stable"],
    },
];

/// Everyday sentences with no symptom content.
pub(crate) const GENERIC_CLAUSES: &[&str] = &[
    "the new coffee place downtown has great pastries",
    "we watched the football game at the pub last night",
    "the bus was late again this morning",
    "our team finally shipped the new release",
    "the recipe needs two cups of flour and some butter",
    "that movie had a really clever twist at the end",
    "the garden tomatoes are finally turning red",
    "traffic on the highway was terrible today",
    "the cat knocked a glass off the table",
    "our landlord is painting the hallway this week",
    "the library extended its opening hours",
    "the concert tickets sold out in minutes",
    "the hiking trail was muddy after the rain",
    "the printer at work jammed three times",
    "we are planning a trip to the coast in june",
    "the store had a sale on winter jackets",
    "the neighbors adopted a golden retriever puppy",
    "the city is repaving the main street",
    "the new phone has a much better camera",
    "the soup tastes better the next day",
    "the bike needs a new chain before summer",
    "the museum opened a dinosaur exhibit",
    "my cousin is getting married in the fall",
    "the pizza arrived cold but it was still good",
    "we repainted the fence over the weekend",
    "the game update broke the online mode",
    "the farmers market has fresh peaches now",
    "the train station is being renovated",
    "the podcast episode about space was fascinating",
    "the kids built a snowman in the yard",
    "the office moved to the third floor",
    "the laptop battery lasts about six hours",
];

/// Filler words mixed into sentences as lexical noise.
pub(crate) const FILLER_WORDS: &[&str] = &[
    "honestly", "lately", "again", "really", "today", "somehow", "basically", "literally",
    "recently", "still", "just", "kind", "of", "seriously", "tonight", "anyway", "also",
    "now", "mostly", "sometimes",
];

/// Benign sentences that nevertheless contain a lexicon keyword.
pub(crate) const KEYWORD_DISTRACTORS: &[&str] = &[
    "the dog was so tired after the long walk",
    "put the baby to sleep mode on the laptop",
    "she has a real interest in medieval history",
    "the interest rate on the loan went up",
    "we avoid the toll road on weekends",
    "the band played a song called panic station",
    "the movie was about a manic pixie girl",
    "the economists talked about the great depression",
    "the tired old couch finally went to the dump",
    "i read a paper on metal fatigue in bridges",
    "the wedding ritual lasted all afternoon",
    "avoiding sugar has been easy this month",
];

/// Wrappers that turn a clause into a negated or uncertain statement, with the
/// probability that a single annotator marks the result as uncertain.
pub(crate) const STATUS_WRAPPERS: &[(&str, f64)] = &[
    ("{C}", 0.07),
    ("honestly {C}", 0.07),
    ("{C} and it has been weeks", 0.07),
    ("i don't think it is true that {C}", 0.85),
    ("is it normal that {C}?", 0.7),
    ("maybe {C} but i am not sure", 0.55),
    ("{C} but that was years ago and it stopped", 0.8),
    ("people tell me {C} but i really doubt it", 0.75),
];

/// Phrases shared by symptoms that never appear in the same disease; each
/// entry lists the symptoms and the fragments they share.
pub(crate) const SHARED_FRAGMENTS: &[(&[&str], &[&str])] = &[
    (
        &["obsession", "intrusive_memory"],
        &["and it keeps coming back", "and {S} cannot stop thinking about it", "and it is stuck in {P} head"],
    ),
    (
        &["loss_of_interest", "avoid_stimuli"],
        &["so {S} just [stay/stays] home now", "and {S} [skip/skips] everything lately", "so {S} [cancel/cancels] plans"],
    ),
    (
        &["panic_attack", "mood_swing"],
        &["out of nowhere", "without any warning", "and it hits {O} so suddenly"],
    ),
    (
        &["depressed_mood", "anxious_mood"],
        &["all the time", "every single day", "and {S} cannot shake it"],
    ),
    (
        &["compulsion", "fatigue", "suicidal_ideas"],
        &["for hours on end", "and it wears {O} down", "and {S} cannot make it stop"],
    ),
];
