#!/usr/bin/env python3
"""Regenerates the offline fixture bundle in this directory.

Bitext target sentences carry inline markup for the two aligner outputs:
  {...}  tokens neither aligner links
  <...>  tokens only the first aligner leaves unlinked
  [...]  tokens only the second aligner leaves unlinked
Everything else is linked by both. The markup is stripped before writing.

Guess logs need the step count of each question, so split_steps is mirrored
here (codepoint window 30-50, target 31 steps, entity ends forced).
"""
import json
import math
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent


def is_punct(ch):
    cp = ord(ch)
    if cp < 0x80:
        return 0x21 <= cp <= 0x2F or 0x3A <= cp <= 0x40 or 0x5B <= cp <= 0x60 or 0x7B <= cp <= 0x7E
    if cp in (0xA1, 0xA7, 0xAB, 0xB6, 0xB7, 0xBB, 0xBF, 0x37E, 0x387):
        return True
    return 0x2010 <= cp <= 0x2027 or 0x2030 <= cp <= 0x205E


def tokenize(text):
    tokens, start = [], None
    for i, ch in enumerate(text + " "):
        if ch.isspace() or is_punct(ch):
            if start is not None:
                tokens.append((text[start:i], start, i))
                start = None
            if is_punct(ch):
                tokens.append((ch, i, i + 1))
        elif start is None:
            start = i
    return tokens


def strip_markup(marked):
    """Returns (clean text, per-char flag) with flag in {'', 'both', 'a', 'b'}."""
    out, flags, mode = [], [], ""
    opening = {"{": "both", "<": "a", "[": "b"}
    for ch in marked:
        if ch in opening:
            mode = opening[ch]
        elif ch in "}>]":
            mode = ""
        else:
            out.append(ch)
            flags.append(mode)
    return "".join(out), flags


# --- knowledge base ----------------------------------------------------------

FR, BE, UK, PL = "Q142", "Q31", "Q145", "Q36"
COUNTRY_LABELS = {
    FR: {"en": "France", "fr": "France", "pl": "Francja"},
    BE: {"en": "Belgium", "fr": "Belgique", "pl": "Belgia"},
    UK: {"en": "United Kingdom", "fr": "Royaume-Uni", "pl": "Wielka Brytania"},
    PL: {"en": "Poland", "fr": "Pologne", "pl": "Polska"},
}
TYPES = {
    "Q4022": {"en": "river", "fr": "rivière", "pl": "rzeka"},
    "Q5": {"en": "human", "fr": "être humain", "pl": "człowiek"},
    "Q12518": {"en": "tower", "fr": "tour", "pl": "wieża"},
    "Q515": {"en": "city", "fr": "ville", "pl": "miasto"},
    "Q23413": {"en": "castle", "fr": "château", "pl": "zamek"},
    "Q33506": {"en": "museum", "fr": "musée", "pl": "muzeum"},
    "Q5119": {"en": "capital city", "fr": "capitale", "pl": "stolica"},
    "Q1802801": {"en": "dragon", "fr": "dragon", "pl": "smok"},
}


def ref(qid, table):
    return {"kb_id": qid, "labels": table[qid]}


def page(title, length, links, para, full_text=None):
    p = {"title": title, "page_length": length, "incoming_links": links, "first_paragraph": para}
    if full_text is not None:
        p["full_text"] = full_text
    return p


def entity(qid, labels, descriptions, types=(), countries=(), links=None, sitelinks=20, pages=None):
    return {
        "kb_id": qid,
        "labels": labels,
        "descriptions": descriptions,
        "instance_of": [ref(t, TYPES) for t in types],
        "country_of": [ref(c, COUNTRY_LABELS) for c in countries],
        "direct_country_links": sorted(links if links is not None else countries),
        "sitelink_count": sitelinks,
        "pages": pages or {},
    }


SAMBRE_LONG = ("a river in northern France and in Wallonia, Belgium. It is a left-bank "
               "tributary of the Meuse, which it joins in the Wallonian capital Namur.")

KB = [
    entity("Q217148", {"en": "Sambre", "fr": "Sambre"},
           {"en": "river in France and Belgium", "fr": "rivière de France et de Belgique"},
           types=["Q4022"], countries=[FR, BE], sitelinks=41,
           pages={"en": page("Sambre", 9120, 640, SAMBRE_LONG),
                  "fr": page("Sambre", 42310, 512,
                             "La Sambre est une rivière de France et de Belgique, affluent de la Meuse.")}),
    entity("Q1363", {"en": "Charleroi", "fr": "Charleroi"},
           {"en": "city in Hainaut, Belgium"}, types=["Q515"], countries=[BE], sitelinks=90,
           pages={"en": page("Charleroi", 30110, 2100,
                             "Charleroi is a city and a municipality of Wallonia, located in the province of Hainaut, Belgium.")}),
    entity("Q7542", {"en": "Troyes", "fr": "Troyes"}, {}, countries=[FR], sitelinks=95,
           pages={"fr": page("Troyes", 51000, 3300, "Troyes est une commune française.")}),
    entity("Q23653", {"en": "Dominique de Villepin", "fr": "Dominique de Villepin"},
           {"en": "former French Prime Minister", "fr": "homme politique français"},
           types=["Q5"], countries=[], links=[FR], sitelinks=60,
           pages={"en": page("Dominique de Villepin", 28000, 1500,
                             "Dominique de Villepin is a French politician.",
                             full_text="Dominique de Villepin is a French politician. He served as the former French Prime Minister "
                                       "from 2005 to 2007 and opposed the war in Iraq at the United Nations.")}),
    entity("Q243", {"en": "Eiffel Tower", "fr": "tour Eiffel"},
           {"en": "tower on the Champ de Mars in Paris, France"}, types=["Q12518"], countries=[FR],
           sitelinks=300,
           pages={"en": page("Eiffel Tower", 120000, 15000,
                             "The Eiffel Tower is a wrought-iron lattice tower on the Champ de Mars in Paris, France.")}),
    entity("Q19686", {"en": "River Thames", "fr": "Tamise"},
           {"en": "river in southern England"}, types=["Q4022"], countries=[UK], sitelinks=140,
           pages={"en": page("River Thames", 88000, 9000,
                             "The River Thames is a river that flows through southern England, including London.")}),
    entity("Q84", {"en": "London", "fr": "Londres"}, {"en": "capital of the United Kingdom"},
           types=["Q5119"], countries=[UK], sitelinks=320,
           pages={"en": page("London", 210000, 80000,
                             "London is the capital and largest city of England and the United Kingdom.")}),
    entity("Q90", {"en": "Paris", "fr": "Paris"}, {"en": "capital of France"}, types=["Q5119"],
           countries=[FR], sitelinks=330,
           pages={"en": page("Paris", 250000, 90000, "Paris is the capital and most populous city of France.")}),
    entity("Q456", {"en": "Lyon", "fr": "Lyon"}, {"en": "city in France"}, types=["Q515"],
           countries=[FR], sitelinks=180,
           pages={"en": page("Lyon", 90000, 12000, "Lyon is the third-largest city of France.")}),
    entity("Q23482", {"en": "Marseille", "fr": "Marseille"}, {"en": "city in France"},
           types=["Q515"], countries=[FR], sitelinks=190,
           pages={"en": page("Marseille", 95000, 11000,
                             "Marseille is the prefecture of the Bouches-du-Rhone department.")}),
    entity("Q19675", {"en": "Louvre", "fr": "Louvre"}, {"en": "art museum in Paris"},
           types=["Q33506"], countries=[FR], sitelinks=170,
           pages={"en": page("Louvre", 70000, 20000, "The Louvre is the most-visited museum in the world.")}),
    entity("Q1471", {"en": "Loire", "fr": "Loire"}, {"en": "longest river in France"},
           types=["Q4022"], countries=[FR], sitelinks=110,
           pages={"en": page("Loire", 40000, 5000, "The Loire is the longest river in France.")}),
    entity("Q12191", {"en": "Brittany", "fr": "Bretagne"}, {"en": "region of France"},
           countries=[FR], sitelinks=150,
           pages={"en": page("Brittany", 60000, 8000, "Brittany is a peninsula in the north-west of France.")}),
    # profile without any page text: relatedness cannot be established
    entity("Q3083", {"en": "Nantes", "fr": "Nantes"}, {"en": "city in France"},
           types=["Q515"], countries=[FR], sitelinks=120),
    entity("Q16999", {"en": "Nice", "fr": "Nice"}, {"en": "city in France"}, types=["Q515"],
           countries=[FR], sitelinks=130,
           pages={"en": page("Nice", 50000, 6000, "Nice is a city on the French Riviera.")}),
    # question entities
    entity("Q31487", {"en": "Kraków", "pl": "Kraków"}, {"en": "city in Poland", "pl": "miasto w Polsce"},
           types=["Q515"], countries=[PL], sitelinks=280,
           pages={"en": page("Kraków", 90000, 14000, "Kraków is the second-largest city in Poland."),
                  "pl": page("Kraków", 150000, 30000, "Kraków jest drugim co do wielkości miastem Polski.")}),
    entity("Q180288", {"en": "Wawel", "pl": "Wawel"},
           {"en": "castle and hill in Kraków, Poland", "pl": "wzgórze i zamek w Krakowie"},
           types=["Q23413"], countries=[PL], sitelinks=45,
           pages={"en": page("Wawel", 21000, 1800,
                             "Wawel is a fortified architectural complex in Kraków. It served as the seat of Polish kings."),
                  "pl": page("Wawel", 35000, 4200,
                             "Wawel to wapienne wzgórze w Krakowie. Na wzgórzu stoi zamek królewski.")}),
    entity("Q1146312", {"en": "Wawel Dragon", "pl": "Smok Wawelski"},
           {"en": "dragon of Polish folklore", "pl": "smok z polskiej legendy"},
           types=["Q1802801"], countries=[PL], sitelinks=30,
           pages={"en": page("Wawel Dragon", 9000, 700,
                             "The Wawel Dragon is a dragon in Polish folklore. It lived in a cave below Wawel Hill."),
                  "pl": page("Smok Wawelski", 14000, 1300,
                             "Smok Wawelski to smok z polskiej legendy. Mieszkał w jamie pod Wawelem.")}),
    entity("Q548", {"en": "Vistula", "pl": "Wisła"}, {"en": "longest river in Poland", "pl": "najdłuższa rzeka Polski"},
           types=["Q4022"], countries=[PL], sitelinks=120,
           pages={"en": page("Vistula", 40000, 6000, "The Vistula is the longest river in Poland."),
                  "pl": page("Wisła", 70000, 12000, "Wisła jest najdłuższą rzeką Polski.")}),
    entity("Q1268", {"en": "Frédéric Chopin", "pl": "Fryderyk Chopin"},
           {"en": "Polish composer and pianist", "pl": "polski kompozytor i pianista"},
           types=["Q5"], countries=[], links=[PL, FR], sitelinks=310,
           pages={"en": page("Frédéric Chopin", 140000, 20000, "Frédéric Chopin was a Polish composer and virtuoso pianist."),
                  "pl": page("Fryderyk Chopin", 160000, 25000, "Fryderyk Chopin był polskim kompozytorem i pianistą.")}),
    entity("Q7243", {"en": "Leo Tolstoy", "pl": "Lew Tołstoj"}, {"en": "Russian writer", "pl": "rosyjski pisarz"},
           types=["Q5"], countries=[], links=[], sitelinks=240,
           pages={"en": page("Leo Tolstoy", 100000, 15000, "Leo Tolstoy was a Russian writer."),
                  "pl": page("Lew Tołstoj", 60000, 7000, "Lew Tołstoj był rosyjskim pisarzem.")}),
]


# --- bitext ------------------------------------------------------------------
# (src, marked tgt, target entities [(surface, kb_id|None, ner)], source entities)

CANDIDATE_PAIRS = {
    7: ("Les crues de la Sambre ont inondé la ville de Charleroi .",
        "The floods of the Sambre {river} flooded the town of Charleroi .",
        [("Sambre", "Q217148", "LOC"), ("Charleroi", "Q1363", "LOC")], ["Sambre", "Charleroi"]),
    15: ("Dominique de Villepin a prononcé un discours à l' ONU .",
         "{Former French Prime Minister} Dominique de Villepin gave a speech at the UN .",
         [("Dominique de Villepin", "Q23653", "PER")], ["Dominique de Villepin"]),
    23: ("La tour Eiffel attire des millions de visiteurs .",
         "The {wrought-iron} Eiffel Tower attracts millions of visitors .",
         [("Eiffel Tower", "Q243", "LOC")], ["tour Eiffel"]),
    31: ("Le navire a remonté la Tamise jusqu' à Londres .",
         "The ship sailed up the {river} Thames to London .",
         [("Thames", "Q19686", "LOC"), ("London", "Q84", "LOC")], ["Tamise", "Londres"]),
}

DISTRACTORS = [
    # linked everywhere
    ("Paris est une grande ville .", "Paris is a large city .", [("Paris", "Q90", "LOC")], ["Paris"]),
    ("Lyon est célèbre pour sa cuisine .", "Lyon is famous for its food .", [("Lyon", "Q456", "LOC")], ["Lyon"]),
    ("Nous avons visité Marseille en été .", "We visited Marseille in summer .", [("Marseille", "Q23482", "LOC")], []),
    ("Le Louvre ouvre à neuf heures .", "The Louvre opens at nine .", [("Louvre", "Q19675", "LOC")], ["Louvre"]),
    ("La Loire traverse la France .", "The Loire crosses France .", [("Loire", "Q1471", "LOC")], []),
    ("Il habite à Nice depuis dix ans .", "He has lived in Nice for ten years .", [("Nice", "Q16999", "LOC")], []),
    ("La Sambre rejoint la Meuse .", "The Sambre joins the Meuse .", [("Sambre", "Q217148", "LOC")], []),
    ("Londres est une capitale .", "London is a capital .", [("London", "Q84", "LOC")], ["Londres"]),
    ("Le train part de Troyes .", "The train leaves from Troyes .", [("Troyes", "Q7542", "LOC")], []),
    ("Il pleut à Paris .", "It rains in Paris .", [("Paris", "Q90", "LOC")], []),
    ("Charleroi a une gare .", "Charleroi has a station .", [("Charleroi", "Q1363", "LOC")], []),
    ("La Tamise est large .", "The Thames is wide .", [("Thames", "Q19686", "LOC")], []),
    ("Nous aimons Lyon .", "We love Lyon .", [("Lyon", "Q456", "LOC")], []),
    # only function words or punctuation left unaligned
    ("Il a visité le Louvre l' an dernier .", "He visited {the} Louvre last year .", [("Louvre", "Q19675", "LOC")], []),
    ("Marseille , un port .", "Marseille {,} a port .", [("Marseille", "Q23482", "LOC")], []),
    ("Nous sommes allés à Nice .", "We went {to the} Nice {of it} .", [("Nice", "Q16999", "LOC")], []),
    # nearest unaligned run is more than three tokens away
    ("Après un long voyage , nous sommes arrivés à Lyon .",
     "{Yesterday morning} , after a long trip , we finally reached Lyon .", [("Lyon", "Q456", "LOC")], []),
    ("Paris a accueilli les jeux .", "Paris hosted the games in a very {remarkable summer} .", [("Paris", "Q90", "LOC")], []),
    # unaligned run not found in the entity page
    ("La ville de Marseille nous a accueillis .", "The {beautiful} city of Marseille welcomed us .",
     [("Marseille", "Q23482", "LOC")], []),
    ("Nous avons vu la Loire .", "We saw the {quiet} Loire .", [("Loire", "Q1471", "LOC")], []),
    ("Le Louvre était bondé .", "The Louvre was {extremely} crowded .", [("Louvre", "Q19675", "LOC")], []),
    # entity missing from the knowledge base
    ("Le chef Paul Bocuse a ouvert un restaurant .", "The {famous} chef Paul Bocuse opened a restaurant .",
     [("Paul Bocuse", "Q99999901", "PER")], []),
    ("Le village de Saint-Rémy est calme .", "The {tiny} village of Saint-Rémy is calm .",
     [("Saint-Rémy", "Q99999902", "LOC")], []),
    # entity without a KB link
    ("La chanteuse Zaz a chanté .", "The {young} singer Zaz performed .", [("Zaz", None, "PER")], []),
    # profile without page text
    ("Nous avons quitté Nantes .", "We left the {port city} Nantes .", [("Nantes", "Q3083", "LOC")], []),
    # no entities at all
    ("Il faisait froid cet hiver .", "It was {very} cold that winter .", [], []),
    ("Le repas était bon .", "The meal was {truly} good .", [], []),
    ("Nous avons marché longtemps .", "We walked {for many hours} .", [], []),
    # one aligner links the run: only the intersection ensemble sees it
    ("La Loire coule vers l' ouest .", "The <river> Loire flows west .", [("Loire", "Q1471", "LOC")], ["Loire"]),
    ("La Tamise traverse Londres .", "The [river] Thames crosses London .", [("Thames", "Q19686", "LOC"), ("London", "Q84", "LOC")], []),
    # the entity itself is the unaligned run
    ("Nous avons rencontré quelqu' un hier .", "We met {Jean Moulin} yesterday .", [("Jean Moulin", "Q99999903", "PER")], []),
    # source-side entity only
    ("La Bretagne est belle .", "The region is {very} beautiful .", [], ["Bretagne"]),
    # more plain pairs
    ("Le musée est fermé .", "The museum is closed .", [], []),
    ("Il lit un livre .", "He reads a book .", [], []),
    ("Elle chante bien .", "She sings well .", [], []),
    ("Nous partons demain .", "We leave tomorrow .", [], []),
    ("Le ciel est bleu .", "The sky is blue .", [], []),
    ("Ils jouent au football .", "They play football .", [], []),
    ("La porte est ouverte .", "The door is open .", [], []),
    ("Je bois du café .", "I drink coffee .", [], []),
    ("Le chat dort .", "The cat sleeps .", [], []),
    ("Il est tard .", "It is late .", [], []),
    ("Nice est au bord de la mer .", "Nice is by the sea .", [("Nice", "Q16999", "LOC")], []),
    ("Paris compte de nombreux ponts .", "Paris has many bridges .", [("Paris", "Q90", "LOC")], []),
    ("Le Louvre possède la Joconde .", "The Louvre owns the Mona Lisa .", [("Louvre", "Q19675", "LOC")], []),
    ("La Bretagne produit du cidre .", "Brittany produces cider .", [("Brittany", "Q12191", "LOC")], ["Bretagne"]),
]

assert len(DISTRACTORS) == 46


def build_bitext():
    rows, dist = [], iter(DISTRACTORS)
    for i in range(50):
        rows.append(CANDIDATE_PAIRS[i] if i in CANDIDATE_PAIRS else next(dist))
    rng = random.Random(7)
    bitext, align_a, align_b, entities = [], [], [], []
    for i, (src, marked, tgt_ents, src_ents) in enumerate(rows):
        pair_id = f"fr-en-{i:03d}"
        tgt, flags = strip_markup(marked)
        score = 1.050 + rng.randint(0, 1000) / 1e6
        bitext.append(f"{pair_id}\t{score:.6f}\t{src}\t{tgt}")
        src_toks, tgt_toks = tokenize(src), tokenize(tgt)
        edges_a, edges_b = [], []
        for t, (_, start, _) in enumerate(tgt_toks):
            s = min(t * len(src_toks) // len(tgt_toks), len(src_toks) - 1)
            flag = flags[start]
            if flag not in ("both", "a"):
                edges_a.append((s, t))
            if flag not in ("both", "b"):
                edges_b.append((s, t))
        # the second aligner also emits a spurious many-to-one link now and then
        if len(src_toks) > 2 and i % 5 == 0:
            edges_b.append((len(src_toks) - 1, len(tgt_toks) - 1))
        align_a.append(" ".join(f"{s}-{t}" for s, t in sorted(set(edges_a))))
        align_b.append(" ".join(f"{s}-{t}" for s, t in sorted(set(edges_b))))
        for side, text, ents in (("target", tgt, tgt_ents), ("source", src, [(e, None, "MISC") for e in src_ents])):
            toks = tokenize(text)
            for surface, kb_id, ner in ents:
                begin = text.index(surface)
                end = begin + len(surface)
                s_tok = next(k for k, t in enumerate(toks) if t[1] == begin)
                e_tok = next(k for k, t in enumerate(toks) if t[2] == end) + 1
                rec = {"pair_id": pair_id, "side": side, "start_token": s_tok, "end_token": e_tok,
                       "surface": surface, "ner_label": ner}
                if kb_id:
                    rec["kb_id"] = kb_id
                entities.append(rec)
    return bitext, align_a, align_b, entities


# --- questions ---------------------------------------------------------------

def split_steps(text, entity_spans, lo=30, hi=50, target=31):
    n = len(text)
    if n == 0:
        return []
    ents = [(len(text.encode()[:s].decode()), len(text.encode()[:e].decode())) for s, e in entity_spans]
    space = [c.isspace() for c in text]

    def forced_after(p):
        return min((e for _, e in ents if p < e < n and e <= p + hi), default=n)

    def successors(p):
        f = forced_after(p)
        if f < n:
            return [f]
        if n - p <= hi:
            return [n]
        out = [b for b in range(p + lo, min(p + hi, n - 1) + 1)
               if space[b - 1] and not space[b] and not any(s < b < e for s, e in ents)]
        return out or [p + hi]

    # step-count ranges per position: over all paths, and over paths without
    # a forced step shorter than lo (None when there is none)
    reach = [None] * (n + 1)
    reach[n] = ((0, 0), (0, 0))
    for p in range(n - 1, -1, -1):
        all_r, clean_r = None, None
        for b in successors(p):
            short_forced = b < n and b - p < lo and forced_after(p) == b
            a = reach[b][0]
            all_r = (a[0] + 1, a[1] + 1) if all_r is None else (min(all_r[0], a[0] + 1), max(all_r[1], a[1] + 1))
            c = reach[b][1]
            if not short_forced and c is not None:
                clean_r = (c[0] + 1, c[1] + 1) if clean_r is None else (min(clean_r[0], c[0] + 1), max(clean_r[1], c[1] + 1))
        reach[p] = (all_r, clean_r)

    cuts, p = [], 0
    while p < n:
        nxt = successors(p)
        if len(nxt) == 1:
            cuts.append(nxt[0])
            p = nxt[0]
            continue
        k = len(cuts)
        want = hi
        if target > k:
            want = min(max(math.floor((n - p) / (target - k) + 0.5), lo), hi)
        need = target - k - 1 if target > k + 1 else 0

        def miss(r):
            return r[0] - need if need < r[0] else (need - r[1] if need > r[1] else 0)

        def key(b):
            best_path = (miss(reach[b][0]), 1)
            if reach[b][1] is not None:
                best_path = min(best_path, (miss(reach[b][1]), 0))
            return best_path + (abs(b - p - want),)

        best = nxt[0]
        for b in nxt:
            if key(b) <= key(best):
                best = b
        cuts.append(best)
        p = best
    return cuts


def q_entities(text, mentions):
    out, pos, raw = [], 0, text.encode()
    for surface, kb_id in mentions:
        begin = raw.index(surface.encode(), pos)
        pos = begin + len(surface.encode())
        out.append({"span": [begin, begin + len(surface.encode())], "kb_id": kb_id})
    return out


QUESTIONS = [
    ("xqb-001", "en",
     "This city grew around a limestone hill on the left bank of the Vistula. Legend holds that a cobbler "
     "named Skuba defeated the Wawel Dragon by feeding it a sheep stuffed with sulphur, and the beast "
     "drank from the river until it burst. The royal castle on Wawel served as the residence of kings "
     "for five centuries. For ten points, name this former capital of Poland.",
     [("Vistula", "Q548"), ("Wawel Dragon", "Q1146312"), ("Wawel", "Q180288")],
     ["Kraków", "Krakow", "Cracow"]),
    ("xqb-002", "pl",
     "To miasto wyrosło wokół wapiennego wzgórza nad Wisłą. Według legendy szewczyk Skuba pokonał "
     "Smok Wawelski, podając mu owcę wypchaną siarką, a bestia piła wodę z rzeki, aż pękła. Zamek na "
     "Wawel przez pięć stuleci był siedzibą królów. Za dziesięć punktów podaj nazwę tej dawnej stolicy Polski.",
     [("Wisłą", "Q548"), ("Smok Wawelski", "Q1146312"), ("Wawel", "Q180288")],
     ["Kraków", "Krakow"]),
    ("xqb-003", "en",
     "This composer left Warsaw at twenty and never returned, yet his mazurkas and polonaises carried the "
     "rhythms of the villages along the Vistula into the salons of Paris. His heart was brought back after "
     "his death and placed in a pillar of the Holy Cross Church. He wrote two piano concertos and two sets "
     "of etudes, and critics have set him beside Leo Tolstoy as a national symbol. For ten points, name "
     "this poet of the piano, whose Revolutionary Etude mourned the fall of the November Uprising.",
     [("Vistula", "Q548"), ("Leo Tolstoy", "Q7243")],
     ["Frédéric Chopin", "Chopin", "Fryderyk Chopin"]),
    ("xqb-004", "pl",
     "Ten kompozytor opuścił Warszawę w wieku dwudziestu lat i nigdy nie wrócił, lecz jego mazurki i "
     "polonezy przeniosły rytmy wsi znad Wisły do paryskich salonów. Jego serce sprowadzono do kraju i "
     "umieszczono w filarze kościoła Świętego Krzyża. Krytycy stawiają go obok, jak Lew Tołstoj, "
     "symboli narodowych. Za dziesięć punktów podaj nazwisko tego poety fortepianu.",
     [("Wisły", "Q548"), ("Lew Tołstoj", "Q7243")],
     ["Fryderyk Chopin", "Chopin"]),
]


def guess_log(qid, steps, correct_from, answer, wrong, rng):
    rows = []
    for step in range(steps):
        if correct_from is not None and step >= correct_from:
            conf = min(0.99, 0.45 + 0.08 * (step - correct_from) + rng.random() * 0.02)
            rows.append({"question_id": qid, "step": step, "guess": answer, "confidence": round(conf, 4)})
        else:
            rows.append({"question_id": qid, "step": step, "guess": wrong,
                         "confidence": round(0.05 + rng.random() * 0.3, 4)})
    return rows


def build_questions():
    questions, orig_logs, expl_logs = [], [], []
    rng = random.Random(11)
    # fraction of the steps after which the answer appears: original, explicitated
    timing = {"xqb-001": (0.6, 0.4), "xqb-002": (0.8, 0.6), "xqb-003": (None, 0.7), "xqb-004": (0.5, 0.5)}
    wrong = {"xqb-001": "Warsaw", "xqb-002": "Gdańsk", "xqb-003": "Liszt", "xqb-004": "Moniuszko"}
    for qid, lang, text, mentions, aliases in QUESTIONS:
        ents = q_entities(text, mentions)
        questions.append({"question_id": qid, "lang": lang, "text": text, "entities": ents,
                          "answer_aliases": aliases})
        steps = len(split_steps(text, [tuple(e["span"]) for e in ents]))
        first_o, first_e = (None if f is None else int(f * steps) for f in timing[qid])
        answer = aliases[0]
        log = guess_log(qid, steps, first_o, answer, wrong[qid], rng)
        if qid == "xqb-001":
            log[2]["confidence"] = 0.72  # an early, confident miss
        orig_logs += log
        expl_logs += guess_log(qid, steps, first_e, answer, wrong[qid], rng)
    return questions, orig_logs, expl_logs


# --- annotation ----------------------------------------------------------------

def build_annotation():
    rng = random.Random(3)
    labels = []
    for k in range(24):
        task = f"fr-en-{k:03d}:e0-1:s1-2"
        truth = k % 3 != 0
        for annotator in ("ann1", "ann2", "ann3"):
            vote = truth if rng.random() < 0.8 else not truth
            if vote:
                rec = {"task_id": task, "annotator_id": annotator, "category": "AdditionalInformation",
                       "is_explicitation": True, "src_span": [0, 6], "tgt_span": [4, 10]}
            elif rng.random() < 0.5:
                rec = {"task_id": task, "annotator_id": annotator, "category": "AdditionalInformation",
                       "is_explicitation": False}
            else:
                rec = {"task_id": task, "annotator_id": annotator,
                       "category": rng.choice(["Paraphrase", "TranslationErrorNoise"])}
            labels.append(rec)
    # counts of (high, mid, low) per slice; 100 ratings each
    slices = [
        ("decision", None, (62, 18, 20)),
        ("generation", "Short", (55, 16, 29)),
        ("generation", "Mid", (76, 12, 12)),
        ("generation", "Long", (92, 6, 2)),
        ("integration", "Short", (70, 18, 12)),
        ("integration", "Mid", (86, 12, 2)),
    ]
    ratings = []
    for aspect, gen_type, counts in slices:
        values = [v for v, c in zip(("high", "mid", "low"), counts) for _ in range(c)]
        rng.shuffle(values)
        for k, v in enumerate(values):
            rec = {"item_id": f"{aspect}-{gen_type or 'all'}-{k:03d}", "aspect": aspect, "rating": v}
            if gen_type:
                rec["gen_type"] = gen_type
            ratings.append(rec)
    return labels, ratings


def write_lines(name, lines):
    (HERE / name).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def write_jsonl(name, rows):
    write_lines(name, [json.dumps(r, ensure_ascii=False, separators=(",", ":")) for r in rows])


def main():
    snapshot = {"schema_version": 1, "fetched_at": "2026-01-01T00:00:00Z", "source": "file",
                "entities": {e["kb_id"]: e for e in KB}}
    (HERE / "kb_snapshot.json").write_text(json.dumps(snapshot, ensure_ascii=False, indent=1) + "\n",
                                           encoding="utf-8")
    bitext, align_a, align_b, entities = build_bitext()
    write_lines("bitext.tsv", bitext)
    write_lines("align.awesome.txt", align_a)
    write_lines("align.simalign.txt", align_b)
    write_jsonl("entities.jsonl", entities)

    def config(src, tgt, country):
        return {"src_lang": src, "tgt_lang": tgt, "source_country": country,
                "checks": [{"property": "closeness", "tau": 1, "comparator": "ge"}],
                "well_known_cutoff": 250, "missing_page": "pool_minimum"}

    (HERE / "decision_config.json").write_text(json.dumps(config("fr", "en", FR), indent=1) + "\n")
    (HERE / "decision_config.pl.json").write_text(json.dumps(config("pl", "en", PL), indent=1) + "\n")

    questions, orig_logs, expl_logs = build_questions()
    write_jsonl("questions.jsonl", questions)
    write_jsonl("guesses.original.jsonl", orig_logs)
    write_jsonl("guesses.explicitation.jsonl", expl_logs)

    labels, ratings = build_annotation()
    write_jsonl("labels.jsonl", labels)
    write_jsonl("ratings.jsonl", ratings)
    write_lines("win_curve.tsv", ["# position  win_probability", "0.0 1.0", "0.25 0.9", "0.5 0.6",
                                  "0.75 0.3", "1.0 0.0"])


if __name__ == "__main__":
    main()
