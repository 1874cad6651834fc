"""Regenerate oracle.csv from the reference Python scorers.

Requires `pip install vaderSentiment==3.3.2 textblob==0.20.1`. The rule-based
scores are captured before the reference rounds them, so the frozen values
carry full double precision.
"""
import csv
import sys

import vaderSentiment.vaderSentiment as vs
from textblob import TextBlob

vs.round = lambda x, n=None: x
analyzer = vs.SentimentIntensityAnalyzer()

with open("corpus.txt", encoding="utf-8") as f:
    lines = [line.rstrip("\n") for line in f]

out = csv.writer(sys.stdout, lineterminator="\n")
out.writerow(["line", "pos", "neg", "neu", "compound", "polarity", "subjectivity"])
for i, text in enumerate(lines, start=1):
    v = analyzer.polarity_scores(text)
    s = TextBlob(text).sentiment
    out.writerow([i, repr(v["pos"]), repr(v["neg"]), repr(v["neu"]), repr(v["compound"]),
                  repr(float(s.polarity)), repr(float(s.subjectivity))])
