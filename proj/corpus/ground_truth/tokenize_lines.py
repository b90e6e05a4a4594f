KEYWORDS = {"if", "else", "while", "return", "def", "for", "in"}


class Token:
    def __init__(self, kind, text, line, column):
        self.kind = kind
        self.text = text
        self.line = line
        self.column = column

    def __repr__(self):
        return "Token(%s, %r)" % (self.kind, self.text)


def classify(word):
    if word in KEYWORDS:
        return "keyword"
    if word.isdigit():
        return "number"
    if word.isidentifier():
        return "name"
    return "symbol"


def split_line(line):
    words = []
    current = ""
    for ch in line:
        if ch.isalnum() or ch == "_":
            current += ch
            continue
        if current:
            words.append(current)
            current = ""
        if not ch.isspace():
            words.append(ch)
    if current:
        words.append(current)
    return words


def tokenize(source):
    tokens = []
    for number, line in enumerate(source.splitlines(), start=1):
        column = 0
        for word in split_line(line):
            column = line.index(word, column)
            tokens.append(Token(classify(word), word, number, column))
            column += len(word)
    return tokens


def count_kinds(tokens):
    counts = {}
    for token in tokens:
        counts[token.kind] = counts.get(token.kind, 0) + 1
    return counts


def longest_name(tokens):
    best = None
    for token in tokens:
        if token.kind != "name":
            continue
        if best is None or len(token.text) > len(best.text):
            best = token
    return best
