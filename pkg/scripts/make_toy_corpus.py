"""Regenerate the bundled toy corpus (src/mtpipe/data/toy_corpus.jsonl).

40 source segments over three language pairs, five simulated MT systems
each (200 records). System outputs are seeded perturbations of the
reference; human scores grow with perturbation severity plus noise.
de-en and en-de carry MQM scores, zh-en carries raw DA from two raters.

    python scripts/make_toy_corpus.py [--out PATH] [--seed 13]
"""

import argparse
import random
from pathlib import Path

from mtpipe.corpus import LanguagePair, RatedSegment, RatingKind, save_ratings

DE_EN = [
    ("Damit können doppelt so viele Studierende ausgebildet werden wie bisher.",
     "In that way, twice as many students can be educated as before."),
    ("Der Zug nach Berlin hatte heute Morgen fast eine Stunde Verspätung.",
     "The train to Berlin was almost an hour late this morning."),
    ("Die Stadt plant, im nächsten Jahr drei neue Parks zu eröffnen.",
     "The city plans to open three new parks next year."),
    ("Hast du den Schlüssel für das Büro gesehen?",
     "Have you seen the key to the office?"),
    ("Das Museum bleibt wegen Renovierungsarbeiten bis Ende Mai geschlossen. Tickets werden erstattet.",
     "The museum will remain closed for renovation until the end of May. Tickets will be refunded."),
    ("Die Firma meldete für das dritte Quartal einen deutlichen Gewinnanstieg.",
     "The company reported a significant rise in profits for the third quarter."),
    ("Bitte schalten Sie Ihre Mobiltelefone während der Vorstellung aus!",
     "Please switch off your mobile phones during the performance!"),
    ("Nach dem Sturm waren viele Straßen im Norden des Landes gesperrt.",
     "After the storm, many roads in the north of the country were closed."),
    ("Sie buchte einen Rückflug und fuhr am nächsten Tag nach Hause.",
     "She booked a return flight and went home the next day."),
    ("Der neue Trainer will die Mannschaft zurück in die erste Liga führen.",
     "The new coach wants to lead the team back into the first division."),
    ("Die Ausstellung zeigt Gemälde aus dem späten neunzehnten Jahrhundert (darunter zwei Leihgaben).",
     "The exhibition shows paintings from the late nineteenth century (including two loans)."),
    ("Wir haben das Problem gemeldet, aber noch keine Antwort erhalten. Das ist ärgerlich.",
     "We reported the problem but have not received an answer yet. That is annoying."),
    ("Die Bibliothek bietet jetzt auch am Sonntag Öffnungszeiten an.",
     "The library now also offers opening hours on Sunday."),
    ("Er sagte: „Wir werden nicht aufgeben.“",
     'He said: "We will not give up."'),
]

ZH_EN = [
    ("我希望你们能准时，不是想要你们的优惠券！！",
     "I hope you can be on time, and it is not that I want your coupons!"),
    ("这家餐厅的服务很好，但是价格有点贵。",
     "The service at this restaurant is very good, but the prices are a bit high."),
    ("明天上午十点在会议室开会。",
     "There will be a meeting in the conference room at ten tomorrow morning."),
    ("你能帮我查一下订单的状态吗？",
     "Can you help me check the status of my order?"),
    ("由于天气原因，航班被取消了。我们只能改签到第二天。",
     "The flight was cancelled because of the weather. We could only rebook for the next day."),
    ("这本书讲述了一个家庭三代人的故事。",
     "This book tells the story of three generations of one family."),
    ("政府宣布将投资建设更多的公共交通设施。",
     "The government announced that it will invest in building more public transport facilities."),
    ("包裹已经到了，但是盒子被压坏了。",
     "The package has arrived, but the box was crushed."),
    ("请在周五之前提交你的申请材料。",
     "Please submit your application materials before Friday."),
    ("他每天早上跑步五公里，已经坚持了三年。",
     "He runs five kilometres every morning and has kept it up for three years."),
    ("这个手机的电池续航时间比上一代长得多。",
     "The battery life of this phone is much longer than that of the previous generation."),
    ("孩子们在公园里放风筝，玩得很开心。",
     "The children were flying kites in the park and having a great time."),
    ("我们已经收到您的退款申请，会尽快处理。",
     "We have received your refund request and will process it as soon as possible."),
]

EN_DE = [
    ("The meeting has been moved to Thursday afternoon.",
     "Die Besprechung wurde auf Donnerstagnachmittag verschoben."),
    ("Our hotel was right next to the old harbour.",
     "Unser Hotel lag direkt neben dem alten Hafen."),
    ("Could you send me the report by tomorrow?",
     "Könnten Sie mir den Bericht bis morgen schicken?"),
    ("The bakery on the corner sells the best bread in town.",
     "Die Bäckerei an der Ecke verkauft das beste Brot der Stadt."),
    ("Prices for electricity rose sharply last winter. Many households had to save.",
     "Die Strompreise sind im letzten Winter stark gestiegen. Viele Haushalte mussten sparen."),
    ("The children are learning to swim this summer.",
     "Die Kinder lernen diesen Sommer schwimmen."),
    ("Watch out, the floor is wet!",
     "Vorsicht, der Boden ist nass!"),
    ("The software update fixes several security problems.",
     "Das Software-Update behebt mehrere Sicherheitsprobleme."),
    ("She has worked as a nurse for twenty years.",
     "Sie arbeitet seit zwanzig Jahren als Krankenschwester."),
    ("The concert was sold out within a few minutes.",
     "Das Konzert war innerhalb weniger Minuten ausverkauft."),
    ("Fresh vegetables are delivered every Monday and Thursday.",
     "Frisches Gemüse wird jeden Montag und Donnerstag geliefert."),
    ("The river flooded parts of the old town (again).",
     "Der Fluss überflutete Teile der Altstadt (schon wieder)."),
    ("He called it »the best summer of my life«.",
     "Er nannte es »den besten Sommer meines Lebens«."),
]

# (system_id, operation, base MQM severity)
SYSTEMS = [
    ("sysA", "synonym", 1.0),
    ("sysB", "drop", 4.0),
    ("sysC", "swap", 6.0),
    ("sysD", "truncate", 12.0),
    ("sysE", "drop2", 9.0),
]

FILLERS = {"en": ["really", "also", "then", "now", "just"], "de": ["auch", "dann", "jetzt", "noch", "wohl"]}


def perturb(ref: str, op: str, lang: str, rng: random.Random) -> str:
    words = ref.split()
    if op == "synonym":
        i = rng.randrange(1, len(words))
        return " ".join(words[:i] + [rng.choice(FILLERS[lang])] + words[i:])
    if op == "drop":
        i = rng.randrange(len(words) - 1)
        return " ".join(words[:i] + words[i + 1:])
    if op == "drop2":
        i = rng.randrange(len(words) - 2)
        return " ".join(words[:i] + words[i + 2:])
    if op == "swap":
        i = rng.randrange(len(words) - 1)
        words[i], words[i + 1] = words[i + 1], words[i]
        return " ".join(words)
    if op == "truncate":
        keep = max(2, (len(words) * 3) // 5)
        return " ".join(words[:keep])
    raise ValueError(op)


def build(seed: int) -> list[RatedSegment]:
    rng = random.Random(seed)
    records = []
    for lp_text, data, kind, tgt in (
        ("de-en", DE_EN, RatingKind.MQM, "en"),
        ("zh-en", ZH_EN, RatingKind.DA_RAW, "en"),
        ("en-de", EN_DE, RatingKind.MQM, "de"),
    ):
        lp = LanguagePair.parse(lp_text)
        for i, (src, ref) in enumerate(data, start=1):
            for j, (system, op, severity) in enumerate(SYSTEMS):
                hyp = perturb(ref, op, tgt, rng)
                mqm = min(25.0, max(0.0, round(severity + rng.uniform(-2.0, 2.0))))
                if kind is RatingKind.MQM:
                    score, rater = mqm, None
                else:
                    score = float(round(100.0 - 3.2 * mqm + rng.uniform(-4.0, 4.0)))
                    score = min(100.0, max(0.0, score))
                    rater = f"r{1 + (i + j) % 2}"
                records.append(
                    RatedSegment(
                        segment_id=f"{lp_text}-{i:03d}",
                        lp=lp,
                        system_id=system,
                        source=src,
                        hypothesis=hyp,
                        score=score,
                        rating_kind=kind,
                        reference=ref,
                        domain="toy",
                        rater_id=rater,
                        year=2024,
                    )
                )
    return records


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    default_out = Path(__file__).resolve().parent.parent / "src" / "mtpipe" / "data" / "toy_corpus.jsonl"
    parser.add_argument("--out", type=Path, default=default_out)
    parser.add_argument("--seed", type=int, default=13)
    args = parser.parse_args()
    records = build(args.seed)
    save_ratings(records, args.out)
    print(f"wrote {len(records)} records to {args.out}")


if __name__ == "__main__":
    main()
