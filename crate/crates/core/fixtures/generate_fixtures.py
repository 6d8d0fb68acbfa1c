#!/usr/bin/env python3
"""Regenerates the JSON fixtures in this directory.

Run from anywhere: python3 generate_fixtures.py
Output is deterministic (fixed seed, sorted keys where order is free).
"""

import json
import math
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))

CATALOG = [
    ("ACC", "Right to access",
     "The data subject can obtain confirmation of whether their personal data is processed and view or download a copy of it."),
    ("REC", "Right to rectification",
     "The data subject can have inaccurate personal data corrected and incomplete records completed."),
    ("RES", "Right to restriction",
     "The data subject can require that processing of their personal data be limited or suspended."),
    ("CMP", "Right to complaint",
     "The data subject can lodge a complaint with a supervisory authority."),
    ("ERS", "Right to erasure",
     "The data subject can have their personal data deleted or removed without undue delay."),
    ("OBJ", "Right to object",
     "The data subject can object to processing, including profiling and direct marketing."),
    ("PRT", "Right to portability",
     "The data subject can receive their personal data in a structured machine-readable format and transmit it to another controller."),
    ("WCON", "Right to withdraw consent",
     "The data subject can withdraw a previously given consent at any time, as easily as it was given."),
    ("CON", "Consent",
     "Processing relies on a freely given, specific and informed agreement of the data subject."),
    ("CAT", "Personal data category",
     "The categories of personal data collected, such as name, email or location, are disclosed."),
    ("SCAT", "Personal data special category",
     "Sensitive data such as health, biometric or religious information may only be processed under an exception."),
    ("ORG", "Personal data origin",
     "The source of personal data not obtained from the data subject is disclosed."),
    ("DIR", "Direct",
     "Information is provided when personal data are collected directly from the data subject."),
    ("PUB", "Publicly",
     "The data subject is told whether personal data came from publicly accessible sources."),
    ("TPA", "Third party",
     "Recipients and third parties that receive personal data are identified."),
    ("COK", "Cookie",
     "Cookies and similar tracking technologies stored on a device require notice and agreement."),
    ("TEC", "Technical measures",
     "Technical and organisational measures such as pseudonymisation build data protection into the system design."),
    ("SEC", "Ensuring security",
     "Processing is protected against unauthorised access, loss or damage through encryption, passwords, authentication and access control."),
    ("SAS", "Security assessment",
     "The effectiveness of security measures is regularly tested, audited and evaluated."),
    ("TRN", "Personal data transfer",
     "Transfers of personal data to other countries or international organisations require adequate safeguards."),
    ("CHL", "Children",
     "Processing the data of a child requires authorisation by the holder of parental responsibility."),
    ("TIM", "Personal data time stored",
     "Personal data are stored no longer than necessary and the retention period is stated."),
    ("DUR", "Processing duration",
     "Processing lasts only as long as the stated purpose requires."),
    ("CNF", "Ensure confidentiality",
     "Personal data remain confidential and are disclosed only to authorised persons."),
    ("BRC", "Inform breach to data subject",
     "Data subjects are informed without undue delay about a breach that puts them at high risk."),
    ("NTF", "Data breach notification content",
     "A breach notification describes the nature of the breach, its likely consequences and the measures taken."),
]


def provisions():
    return [{"code": c, "title": t, "description": d} for c, t, d in CATALOG]


def small_corpus():
    docs = [
        ("PM", "Password manager", [
            ("PM-1", "If a key file is required to unlock the database, the database does not open unless the key file is present.", ["SEC"]),
            ("PM-2", "The application shall encrypt the password database with a master password.", ["SEC", "CNF"]),
            ("PM-3", "Users can export all stored entries to a CSV file.", ["ACC", "PRT"]),
            ("PM-4", "The main window shows the entry list sorted by title.", []),
        ]),
        ("SN", "Social network", [
            ("SN-1", "A user can delete their account and all posted content.", ["ERS"]),
            ("SN-2", "I want to stop receiving notifications.", ["WCON"]),
            ("SN-3", "Users can edit the name and email stored in their profile.", ["REC"]),
        ]),
        ("SH", "Online shop", [
            ("SH-1", "The shop asks for agreement before placing analytics cookies.", ["COK", "CON"]),
            ("SH-2", "Customer orders are kept for ten years and then deleted.", ["TIM", "ERS"]),
            ("SH-3", "Payment details are shared with the payment provider only.", ["TPA", "CNF"]),
        ]),
    ]
    documents, links = [], {}
    for doc_id, name, reqs in docs:
        documents.append({
            "id": doc_id,
            "name": name,
            "requirements": [{"id": rid, "text": text} for rid, text, _ in reqs],
        })
        for rid, _, codes in reqs:
            if codes:
                links[rid] = codes
    return {"format_version": 1, "documents": documents, "provisions": provisions(), "links": links}


# Vocabulary used to compose synthetic requirements for each provision.
KEYWORDS = {
    "ACC": ["view", "copy", "access", "download", "personal data"],
    "REC": ["correct", "update", "inaccurate", "edit", "records"],
    "ERS": ["delete", "erase", "remove", "account", "personal data"],
    "PRT": ["export", "machine-readable", "transmit", "format", "controller"],
    "WCON": ["withdraw", "consent", "stop", "unsubscribe", "revoke"],
    "CON": ["consent", "agree", "opt-in", "informed", "agreement"],
    "CAT": ["categories", "name", "email", "location", "collected"],
    "TPA": ["third parties", "recipients", "share", "partners", "disclose"],
    "COK": ["cookies", "tracking", "device", "banner", "notice"],
    "TEC": ["pseudonymisation", "design", "organisational", "measures", "technical"],
    "SEC": ["encrypt", "password", "authentication", "unauthorised", "access control"],
    "TRN": ["transfer", "countries", "international", "safeguards", "abroad"],
    "TIM": ["retention", "stored", "period", "longer", "necessary"],
    "DUR": ["duration", "purpose", "processing", "limited", "lasts"],
    "CNF": ["confidential", "authorised", "disclosed", "secret", "private"],
    "BRC": ["breach", "inform", "high risk", "notify", "undue delay"],
    "NTF": ["breach", "notification", "consequences", "nature", "measures taken"],
}

SUBJECTS = ["The system", "The application", "The service", "The platform", "The portal"]
VERBS = ["shall", "must", "should"]
FILLER = ["for every user", "on request", "within the settings page", "through the web interface",
          "in the mobile client", "for registered customers", "at any time"]
NEUTRAL = [
    "The dashboard shows a summary of recent activity.",
    "Reports can be printed in landscape orientation.",
    "The search field supports wildcard queries.",
    "The toolbar icons follow the platform style guide.",
    "Lists are paginated with twenty items per page.",
]


def synthetic_requirement(rng, codes):
    words = []
    for c in codes:
        words.extend(rng.sample(KEYWORDS[c], 3))
    rng.shuffle(words)
    sentence = "{} {} {} {}.".format(
        rng.choice(SUBJECTS), rng.choice(VERBS), " and ".join(
            [", ".join(words[:-1]), words[-1]] if len(words) > 1 else words),
        rng.choice(FILLER))
    if rng.random() < 0.3:
        sentence += " " + rng.choice(NEUTRAL)
    return sentence


def loo_corpus(seed=16, n_docs=10, reqs_per_doc=10):
    rng = random.Random(seed)
    codes = sorted(KEYWORDS)
    documents, links = [], {}
    for d in range(1, n_docs + 1):
        doc_id = "H{:02d}".format(d)
        reqs = []
        for r in range(1, reqs_per_doc + 1):
            rid = "{}-R{:02d}".format(doc_id, r)
            roll = rng.random()
            if roll < 0.1:
                text, chosen = rng.choice(NEUTRAL), []
            else:
                k = 1 if roll < 0.75 else 2
                chosen = sorted(rng.sample(codes, k))
                text = synthetic_requirement(rng, chosen)
            reqs.append({"id": rid, "text": text})
            if chosen:
                links[rid] = chosen
        documents.append({"id": doc_id, "name": "Synthetic document {}".format(d), "requirements": reqs})
    return {"format_version": 1, "documents": documents, "provisions": provisions(), "links": links}


def indicator_corpus():
    docs = [
        ("D1", [("R1", "encrypt data", ["SEC"]), ("R2", "delete account", ["ERS"])]),
        ("D2", [("R3", "encrypt backups", ["SEC"]), ("R4", "show data", [])]),
        ("D3", [("R5", "delete data", ["ERS"]), ("R6", "encrypt logs", [])]),
    ]
    documents, links = [], {}
    for doc_id, reqs in docs:
        documents.append({"id": doc_id, "name": doc_id,
                          "requirements": [{"id": r, "text": t} for r, t, _ in reqs]})
        for r, _, codes in reqs:
            if codes:
                links[r] = codes
    provs = [p for p in provisions() if p["code"] in ("SEC", "ERS")]
    return {"format_version": 1, "documents": documents, "provisions": provs, "links": links}


FEW_SHOT = [
    {"requirement_text": "The user can download a copy of all data the service stores about them.",
     "codes": ["ACC", "PRT"],
     "rationale": "downloading stored data lets the user see what is processed (ACC) and reuse it elsewhere (PRT)"},
    {"requirement_text": "Passwords are stored as salted hashes and sessions expire after ten minutes of inactivity.",
     "codes": ["SEC"],
     "rationale": "hashing credentials and expiring sessions protect against unauthorised access"},
    {"requirement_text": "A user can close their account, after which their profile is removed.",
     "codes": ["ERS"],
     "rationale": "removing the profile on account closure implements deletion of personal data"},
    {"requirement_text": "Before sending newsletters, the platform asks the user to tick an agreement box.",
     "codes": ["CON"],
     "rationale": "an explicit opt-in collects the agreement needed before processing for marketing"},
    {"requirement_text": "The about page shows the version number of the application.",
     "codes": ["ELSE"],
     "rationale": "the requirement concerns product information and involves no personal data"},
]


def delta_matrix():
    return {"req_ids": ["REQ"], "prov_codes": ["C1", "C2", "C3", "C4"], "scores": [[0.98, 0.1, 0.3, 0.7]]}


def exporter_fixture(corpus, seed=7, dim=12):
    """Vectors shaped like the exporter's output, plus cosines computed here."""
    rng = random.Random(seed)
    ids = [r["id"] for d in corpus["documents"] for r in d["requirements"]] + [p["code"] for p in corpus["provisions"]]
    vectors = {i: [rng.uniform(-1.0, 1.0) for _ in range(dim)] for i in ids}
    pairs = []
    req_ids = ids[: len(ids) - len(corpus["provisions"])]
    codes = ids[len(req_ids):]
    for k in range(10):
        a, b = req_ids[k % len(req_ids)], codes[(3 * k) % len(codes)]
        u, v = vectors[a], vectors[b]
        dot = math.fsum(x * y for x, y in zip(u, v))
        cos = dot / (math.sqrt(math.fsum(x * x for x in u)) * math.sqrt(math.fsum(y * y for y in v)))
        pairs.append({"a": a, "b": b, "cosine": cos})
    embeddings = {"format_version": 1, "dim": dim, "provider": "exporter:fixture", "vectors": vectors}
    return embeddings, pairs


def write(name, value):
    with open(os.path.join(HERE, name), "w", encoding="utf-8") as f:
        json.dump(value, f, indent=2, ensure_ascii=False)
        f.write("\n")


def main():
    small = small_corpus()
    write("corpus.json", small)
    write("loo_corpus.json", loo_corpus())
    write("indicator_corpus.json", indicator_corpus())
    write("examples.json", FEW_SHOT)
    write("delta_matrix.json", delta_matrix())
    embeddings, pairs = exporter_fixture(small)
    write("exporter_embeddings.json", embeddings)
    write("exporter_cosines.json", pairs)


if __name__ == "__main__":
    main()
