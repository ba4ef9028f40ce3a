#!/usr/bin/env python3
"""Regenerate the fixture test suites and the reference training corpus.

Writes fixtures/suites/<tag>.json (one document per suite) and
fixtures/corpus.txt (one sentence per line, grammatical sentences only).
Output is deterministic.
"""

import json
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))


def region(label, text, critical=False):
    return {"label": label, "text": text, "critical": critical}


def term(condition, region_label, sign=1):
    return {"sign": sign, "condition": condition, "region": region_label}


def contrast(name, good, bad, region_label):
    return {"name": name, "lhs": [term(good, region_label)], "rhs": [term(bad, region_label)]}


def write_suite(suite):
    path = os.path.join(HERE, "suites", suite["tag"] + ".json")
    with open(path, "w", encoding="utf-8") as f:
        json.dump(suite, f, indent=2, ensure_ascii=False)
        f.write("\n")


corpus = []

# ---------------------------------------------------------------- Cleft
CLEFT_ITEMS = [
    ("she", "spied", "see", "the giraffe"),
    ("he", "fixed", "fix", "the engine"),
    ("they", "painted", "paint", "the fence"),
    ("she", "cleaned", "clean", "the kitchen"),
    ("he", "opened", "open", "the window"),
    ("we", "washed", "wash", "the car"),
]


def cleft():
    items = []
    for i, (subj, past, base, np) in enumerate(CLEFT_ITEMS, 1):
        def s(verb, cont):
            return [
                region("what", f"What {subj}"),
                region("verb", verb),
                region("was", "was"),
                region("continuation", cont, True),
            ]
        items.append({
            "item_id": i,
            "sentences": {
                "np_match": s(past, np),
                "np_mismatch": s(past, f"{base} {np}"),
                "vp_match": s("did", f"{base} {np}"),
                "vp_mismatch": s("did", np),
            },
        })
        corpus.append(f"What {subj} {past} was {np}")
        corpus.append(f"What {subj} did was {base} {np}")
        corpus.append(f"{subj.capitalize()} {past} {np}")
    return {
        "name": "Wh-Cleft Structures",
        "tag": "Cleft",
        "meta": "Cleft continuation after 'was' must match the category of the wh-clause.",
        "conditions": ["np_match", "np_mismatch", "vp_match", "vp_mismatch"],
        "ungrammatical": ["np_mismatch", "vp_mismatch"],
        "predictions": [
            contrast("np_prediction", "np_match", "np_mismatch", "continuation"),
            contrast("vp_prediction", "vp_match", "vp_mismatch", "continuation"),
        ],
        "items": items,
    }


# ---------------------------------------------------------------- FGD
FGD_ITEMS = [
    ("my mother", "sent", "the present", "Taylor", "last weekend"),
    ("the teacher", "gave", "the book", "Maria", "last month"),
    ("our neighbor", "lent", "the ladder", "James", "last summer"),
    ("the manager", "showed", "the report", "Susan", "last week"),
    ("his uncle", "sold", "the car", "Robert", "last year"),
    ("the chef", "served", "the soup", "Linda", "last night"),
]

FGD_CONDITIONS = ["what_gap", "what_nogap", "that_gap", "that_nogap"]
FGD_UNGRAMMATICAL = ["what_nogap", "that_gap"]


def fgd_predictions(np_label, post_label):
    return [
        contrast("filled_gap_prediction", "that_nogap", "what_nogap", np_label),
        contrast("wh_prediction", "what_gap", "that_gap", post_label),
    ]


def fgd_subj():
    items = []
    for i, (subj, verb, obj, name, _) in enumerate(FGD_ITEMS, 1):
        def s(comp, gap):
            return [
                region("prefix", "I know"),
                region("comp", comp),
                region("np", "" if gap else subj, True),
                region("verb", verb, True),
                region("rest", f"{obj} to {name}"),
            ]
        items.append({"item_id": i, "sentences": {
            "what_gap": s("who", True),
            "what_nogap": s("who", False),
            "that_gap": s("that", True),
            "that_nogap": s("that", False),
        }})
        corpus.append(f"I know who {verb} {obj} to {name}")
        corpus.append(f"I know that {subj} {verb} {obj} to {name}")
    return {
        "name": "Filler-Gap Dependency, Subject Gap",
        "tag": "FGD-subj",
        "meta": "Gap conditions leave the subject NP region empty.",
        "conditions": FGD_CONDITIONS,
        "ungrammatical": FGD_UNGRAMMATICAL,
        "predictions": fgd_predictions("np", "verb"),
        "items": items,
    }


def fgd_obj():
    items = []
    for i, (subj, verb, obj, name, _) in enumerate(FGD_ITEMS, 1):
        def s(comp, gap):
            return [
                region("prefix", "I know"),
                region("comp", comp),
                region("subject", subj),
                region("verb", verb),
                region("np", "" if gap else obj, True),
                region("post", "to", True),
                region("rest", name),
            ]
        items.append({"item_id": i, "sentences": {
            "what_gap": s("what", True),
            "what_nogap": s("what", False),
            "that_gap": s("that", True),
            "that_nogap": s("that", False),
        }})
        corpus.append(f"I know what {subj} {verb} to {name}")
    return {
        "name": "Filler-Gap Dependency, Object Gap",
        "tag": "FGD-obj",
        "meta": "Gap conditions leave the object NP region empty.",
        "conditions": FGD_CONDITIONS,
        "ungrammatical": FGD_UNGRAMMATICAL,
        "predictions": fgd_predictions("np", "post"),
        "items": items,
    }


def fgd_pp():
    items = []
    for i, (subj, verb, obj, name, when) in enumerate(FGD_ITEMS, 1):
        def s(comp, gap):
            return [
                region("prefix", "I know"),
                region("comp", comp),
                region("subject", subj),
                region("verb", verb),
                region("object", obj),
                region("prep", "to"),
                region("np", "" if gap else name, True),
                region("post", when, True),
            ]
        items.append({"item_id": i, "sentences": {
            "what_gap": s("who", True),
            "what_nogap": s("who", False),
            "that_gap": s("that", True),
            "that_nogap": s("that", False),
        }})
        corpus.append(f"I know who {subj} {verb} {obj} to {when}")
        corpus.append(f"I know that {subj} {verb} {obj} to {name} {when}")
    return {
        "name": "Filler-Gap Dependency, PP Gap",
        "tag": "FGD-pp",
        "meta": "Gap conditions leave the prepositional object region empty.",
        "conditions": FGD_CONDITIONS,
        "ungrammatical": FGD_UNGRAMMATICAL,
        "predictions": fgd_predictions("np", "post"),
        "items": items,
    }


# ---------------------------------------------------------------- MVRR
MVRR_ITEMS = [
    ("The ship", "steered", "sunk", "in the storm", "carried treasure"),
    ("The artist", "painted", "drawn", "in the portrait", "was impressed"),
    ("The horse", "raced", "ridden", "past the barn", "fell down"),
    ("The soldier", "attacked", "beaten", "in the battle", "died quickly"),
    ("The student", "taught", "shown", "in the class", "was happy"),
    ("The ball", "kicked", "thrown", "across the yard", "hit the window"),
]


def mvrr():
    items = []
    for i, (subj, ambig, unambig, pp, crit) in enumerate(MVRR_ITEMS, 1):
        def s(reduced, verb):
            return [
                region("subject", subj),
                region("relativizer", "" if reduced else "that was"),
                region("verb", verb),
                region("modifier", pp),
                region("critical", crit, True),
            ]
        items.append({"item_id": i, "sentences": {
            "reduced_ambig": s(True, ambig),
            "reduced_unambig": s(True, unambig),
            "unreduced_ambig": s(False, ambig),
            "unreduced_unambig": s(False, unambig),
        }})
        corpus.append(f"{subj} that was {ambig} {pp} {crit}")
        corpus.append(f"{subj} that was {unambig} {pp} {crit}")
        corpus.append(f"{subj} {unambig} {pp} {crit}")
        corpus.append(f"{subj} {ambig} something {pp}")
    return {
        "name": "Main Verb/Reduced RC Gardenpath",
        "tag": "MVRR",
        "meta": ("Ambiguous verbs have a past tense identical to the participle; "
                 "reduced_ambig is treated as the ungrammatical condition."),
        "conditions": ["reduced_ambig", "reduced_unambig", "unreduced_ambig", "unreduced_unambig"],
        "ungrammatical": ["reduced_ambig"],
        "predictions": [
            contrast("reduction_prediction", "unreduced_ambig", "reduced_ambig", "critical"),
            contrast("ambiguity_prediction", "reduced_unambig", "reduced_ambig", "critical"),
            {
                "name": "interaction_prediction",
                "lhs": [term("reduced_unambig", "critical"), term("unreduced_unambig", "critical", -1)],
                "rhs": [term("reduced_ambig", "critical"), term("unreduced_ambig", "critical", -1)],
            },
        ],
        "items": items,
    }


# ---------------------------------------------------------------- NPI
NPI_ITEMS = [
    ("senator", "journalist", "journalists", "likes", "like"),
    ("author", "critic", "critics", "admires", "admire"),
    ("pilot", "mechanic", "mechanics", "trusts", "trust"),
    ("doctor", "nurse", "nurses", "respects", "respect"),
    ("coach", "player", "players", "praises", "praise"),
    ("lawyer", "judge", "judges", "dislikes", "dislike"),
]
NPI_ANY_ENDINGS = ["has gotten", "votes"], ["has received", "awards"], ["has had", "accidents"], \
    ["has seen", "patients"], ["has won", "games"], ["has lost", "cases"]
NPI_EVER_ENDINGS = ["won"], ["lied"], ["crashed"], ["failed"], ["cheated"], ["complained"]

NPI_CONDITIONS = ["neg_pos", "neg_neg", "pos_neg", "pos_pos"]


def npi(tag, name, npi_word, subject_rc):
    items = []
    for i, (head, emb, embs, verb_s, verb_p) in enumerate(NPI_ITEMS, 1):
        if npi_word == "any":
            aux, end = NPI_ANY_ENDINGS[i - 1]
        else:
            aux, end = "has", NPI_EVER_ENDINGS[i - 1][0]

        def s(matrix_neg, embedded_neg):
            det = "No" if matrix_neg else "The"
            edet = "no" if embedded_neg else "the"
            if subject_rc:
                rc = f"that {verb_s} {edet} {embs}"
            else:
                rc = f"that {edet} {emb} {verb_s}"
            return [
                region("matrix_det", det),
                region("subject", head),
                region("rc", rc),
                region("aux", aux),
                region("npi", npi_word, True),
                region("end", end),
            ]
        items.append({"item_id": i, "sentences": {
            "neg_pos": s(True, False),
            "neg_neg": s(True, True),
            "pos_neg": s(False, True),
            "pos_pos": s(False, False),
        }})
        if subject_rc:
            corpus.append(f"No {head} that {verb_s} the {embs} {aux} {npi_word} {end}")
            corpus.append(f"The {head} that {verb_s} no {embs} {aux} {end}")
        else:
            corpus.append(f"No {head} that the {emb} {verb_s} {aux} {npi_word} {end}")
            corpus.append(f"The {head} that no {emb} {verb_s} {aux} {end}")
    return {
        "name": name,
        "tag": tag,
        "meta": "Negative polarity item licensed only by matrix-clause negation.",
        "conditions": NPI_CONDITIONS,
        "ungrammatical": ["pos_neg", "pos_pos"],
        "predictions": [
            contrast("matrix_licensor_prediction", "neg_pos", "pos_pos", "npi"),
            contrast("embedded_negation_prediction", "neg_neg", "pos_neg", "npi"),
            contrast("swap_intervener_prediction", "neg_pos", "pos_neg", "npi"),
        ],
        "items": items,
    }


# ---------------------------------------------------------------- agreement
AGR_CONDITIONS = ["match_sing", "match_plural", "mismatch_sing", "mismatch_plural"]
AGR_PREDICTIONS = lambda crit: [
    contrast("sing_match_prediction", "match_sing", "mismatch_sing", crit),
    contrast("plural_match_prediction", "match_plural", "mismatch_plural", crit),
]

SVNA_ITEMS = [
    ("lawyer", "lawyers", "mayor", "mayors", "helped", "hired", "hire", "organized"),
    ("farmer", "farmers", "banker", "bankers", "called", "met", "meet", "tired"),
    ("author", "authors", "editor", "editors", "thanked", "liked", "like", "famous"),
    ("pilot", "pilots", "officer", "officers", "greeted", "trusted", "trust", "nervous"),
    ("teacher", "teachers", "parent", "parents", "visited", "praised", "praise", "busy"),
    ("senator", "senators", "reporter", "reporters", "criticized", "interviewed", "interview", "angry"),
]


def svna(tag, name, modifier):
    items = []
    for i, (h, hs, a, as_, src_v, orc_v, _, adj) in enumerate(SVNA_ITEMS, 1):
        def s(plural, match):
            head = hs if plural else h
            attractor = a if plural else as_
            verb_agrees_plural = plural if match else not plural
            verb = "are" if verb_agrees_plural else "is"
            if modifier == "src":
                mod = f"that {src_v} the {attractor}"
            elif modifier == "orc":
                mod = f"that the {attractor} {orc_v}"
            else:
                mod = f"next to the {attractor}"
            end = adj if modifier == "src" else f"very {adj}"
            return [
                region("subject", f"The {head}"),
                region("modifier", mod),
                region("verb", verb, True),
                region("end", end),
            ]
        items.append({"item_id": i, "sentences": {
            "match_sing": s(False, True),
            "match_plural": s(True, True),
            "mismatch_sing": s(False, False),
            "mismatch_plural": s(True, False),
        }})
        corpus.append(f"The {h} is {adj}")
        corpus.append(f"The {hs} are very {adj}")
        corpus.append(f"The {h} {src_v} the {as_}")
    return {
        "name": name,
        "tag": tag,
        "meta": "Attractor noun in the modifier carries the opposite number of the head noun.",
        "conditions": AGR_CONDITIONS,
        "ungrammatical": ["mismatch_sing", "mismatch_plural"],
        "predictions": AGR_PREDICTIONS("verb"),
        "items": items,
    }


RNA_MASC = [("duke", "dukes"), ("king", "kings"), ("prince", "princes"), ("actor", "actors"),
            ("waiter", "waiters"), ("uncle", "uncles")]
RNA_FEM = [("queen", "queens"), ("princess", "princesses"), ("actress", "actresses"),
           ("nun", "nuns"), ("waitress", "waitresses"), ("aunt", "aunts")]
RNA_SRC = [("hunted", "rabbit", "rabbits"), ("fed", "horse", "horses"), ("met", "guest", "guests"),
           ("helped", "child", "children"), ("called", "doctor", "doctors"), ("painted", "wall", "walls")]
RNA_ORC = [("knight", "knights", "distrusts", "distrust"), ("guard", "guards", "fears", "fear"),
           ("farmer", "farmers", "likes", "like"), ("servant", "servants", "hates", "hate"),
           ("baker", "bakers", "admires", "admire"), ("sailor", "sailors", "knows", "know")]


def rna(tag, name, fem, modifier):
    nouns = RNA_FEM if fem else RNA_MASC
    refl_sing = "herself" if fem else "himself"
    items = []
    for i, (h, hs) in enumerate(nouns, 1):
        def s(plural, match):
            head = hs if plural else h
            if modifier == "src":
                v, a, as_ = RNA_SRC[i - 1]
                mod = f"that {v} the {a if plural else as_}"
            else:
                a, as_, v_s, v_p = RNA_ORC[i - 1]
                mod = f"that the {a} {v_s}" if plural else f"that the {as_} {v_p}"
            refl_plural = plural if match else not plural
            refl = "themselves" if refl_plural else refl_sing
            return [
                region("subject", f"The {head}"),
                region("modifier", mod),
                region("verb", "saw"),
                region("reflexive", refl, True),
                region("end", "in the mirror"),
            ]
        items.append({"item_id": i, "sentences": {
            "match_sing": s(False, True),
            "match_plural": s(True, True),
            "mismatch_sing": s(False, False),
            "mismatch_plural": s(True, False),
        }})
        corpus.append(f"The {h} saw {refl_sing} in the mirror")
        corpus.append(f"The {hs} saw themselves in the mirror")
    return {
        "name": name,
        "tag": tag,
        "meta": "Reflexive must agree with the head noun, not the modifier noun.",
        "conditions": AGR_CONDITIONS,
        "ungrammatical": ["mismatch_sing", "mismatch_plural"],
        "predictions": AGR_PREDICTIONS("reflexive"),
        "items": items,
    }


GENERIC = [
    "The dog ran across the yard", "The children played in the park last weekend",
    "She read the letter in the kitchen", "The old man walked to the store",
    "They saw the giraffe at the zoo", "The mayor gave a speech last night",
    "My mother sent a letter to my aunt", "The storm sunk the ship",
    "The captain steered the ship in the storm", "The reporter asked the senator a question",
    "The nurse helped the doctor", "The players are very tired",
    "The waiter brought the soup", "The queen was very famous",
    "The horse jumped over the fence", "The student was happy in the class",
    "The judge is angry", "The teacher is busy", "The pilot is nervous",
    "No one has ever seen the car", "The lawyer has won many cases",
    "The knights distrust the king", "The guards fear the queen",
]

if __name__ == "__main__":
    os.makedirs(os.path.join(HERE, "suites"), exist_ok=True)
    suites = [
        cleft(), fgd_subj(), fgd_obj(), fgd_pp(), mvrr(),
        npi("NPL-any-src", "NPI Licensing, any, Subj RC Modifier", "any", True),
        npi("NPL-any-orc", "NPI Licensing, any, Obj RC Modifier", "any", False),
        npi("NPL-ever-src", "NPI Licensing, ever, Subj RC Modifier", "ever", True),
        npi("NPL-ever-orc", "NPI Licensing, ever, Obj RC Modifier", "ever", False),
        svna("SVNA-src", "Subject-Verb Number Agr., Subj RC Modifier", "src"),
        svna("SVNA-orc", "Subject-Verb Number Agr., Obj RC Modifier", "orc"),
        svna("SVNA-pp", "Subject-Verb Number Agr., PP Modifier", "pp"),
        rna("RNA-m-src", "Reflexive Anaphora, Masc., Subj RC Modifier", False, "src"),
        rna("RNA-m-orc", "Reflexive Anaphora, Masc., Obj RC Modifier", False, "orc"),
        rna("RNA-f-src", "Reflexive Anaphora, Fem., Subj RC Modifier", True, "src"),
        rna("RNA-f-orc", "Reflexive Anaphora, Fem., Obj RC Modifier", True, "orc"),
    ]
    for suite in suites:
        write_suite(suite)
    corpus.extend(GENERIC)
    # Repeat with light shuffling so counts are not all one.
    rng = random.Random(2021)
    lines = sorted(set(corpus))
    out = []
    for _ in range(3):
        rng.shuffle(lines)
        out.extend(lines)
    with open(os.path.join(HERE, "corpus.txt"), "w", encoding="utf-8") as f:
        for line in out:
            f.write(line + "\n")
    print(f"wrote {len(suites)} suites, {len(out)} corpus lines")
