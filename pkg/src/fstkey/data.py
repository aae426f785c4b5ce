"""Bundled English vocabulary and seeded corpus generators.

The package ships a small self-contained word list (everything typeable
on the bundled board: lowercase letters plus apostrophe) and a template
sampler that produces simple sentences over it.  Training and
evaluation corpora are drawn from the same distribution with different
seeds, so a model trained on one generalizes to the other.
"""

from __future__ import annotations

import random
from typing import Sequence

DETERMINERS = (
    "the", "a", "an", "this", "that", "these", "those", "my", "your",
    "his", "her", "its", "our", "their", "some", "any", "each", "every",
    "another", "such",
)

PRONOUNS = (
    "i", "you", "he", "she", "it", "we", "they", "me", "him", "them",
    "us", "who", "what", "which", "someone", "something", "everyone",
    "everything", "nothing", "anybody",
)

AUXILIARIES = (
    "am", "is", "are", "was", "were", "be", "been", "being", "have",
    "has", "had", "do", "does", "did", "will", "would", "can", "could",
    "shall", "should", "may", "might", "must",
)

CONNECTIVES = (
    "and", "or", "but", "so", "if", "then", "than", "because", "while",
    "when", "where", "after", "before", "during", "about", "above",
    "below", "under", "over", "between", "through", "against", "with",
    "without", "within", "into", "onto", "from", "of", "to", "in", "on",
    "at", "by", "for", "as", "off", "up", "down", "out", "near",
    "around", "since", "until", "though", "although", "unless",
)

ADVERBS = (
    "not", "very", "too", "also", "just", "only", "quite", "rather",
    "almost", "always", "often", "sometimes", "never", "again", "still",
    "yet", "soon", "now", "here", "there", "today", "tomorrow",
    "yesterday", "together", "apart", "truly", "really", "actually",
    "finally", "suddenly", "slowly", "quickly", "carefully", "quietly",
    "loudly", "early", "late", "well", "far", "behind", "ahead", "away",
    "back", "once", "twice", "maybe", "perhaps", "indeed", "instead",
    "anyway", "forever", "everywhere", "somewhere", "nowhere", "enough",
)

VERBS = (
    "go", "goes", "went", "gone", "going", "come", "comes", "came",
    "coming", "get", "gets", "got", "getting", "make", "makes", "made",
    "making", "know", "knows", "knew", "known", "think", "thinks",
    "thought", "thinking", "take", "takes", "took", "taken", "taking",
    "see", "sees", "saw", "seen", "seeing", "want", "wants", "wanted",
    "look", "looks", "looked", "looking", "use", "uses", "used",
    "find", "finds", "found", "finding", "give", "gives", "gave",
    "given", "giving", "tell", "tells", "told", "telling", "work",
    "works", "worked", "working", "call", "calls", "called", "calling",
    "try", "tries", "tried", "trying", "ask", "asks", "asked",
    "asking", "need", "needs", "needed", "feel", "feels", "felt",
    "feeling", "become", "became", "leave", "leaves", "left", "put",
    "puts", "putting", "mean", "means", "meant", "meaning", "keep",
    "keeps", "kept", "keeping", "let", "lets", "begin", "begins",
    "began", "begun", "seem", "seems", "seemed", "help", "helps",
    "helped", "talk", "talks", "talked", "turn", "turns", "turned",
    "start", "starts", "started", "show", "shows", "showed", "hear",
    "hears", "heard", "play", "plays", "played", "run", "runs", "ran",
    "move", "moves", "moved", "live", "lives", "lived", "believe",
    "believed", "hold", "holds", "held", "bring", "brings", "brought",
    "happen", "happens", "happened", "write", "writes", "wrote",
    "written", "sit", "sits", "sat", "stand", "stands", "stood",
    "lose", "loses", "lost", "pay", "pays", "paid", "meet", "meets",
    "met", "learn", "learns", "learned", "change", "changes",
    "changed", "lead", "leads", "led", "watch", "watches", "watched",
    "follow", "follows", "followed", "stop", "stops", "stopped",
    "speak", "speaks", "spoke", "read", "reads", "eat", "eats", "ate",
    "drink", "drinks", "drank", "sleep", "sleeps", "slept", "walk",
    "walks", "walked", "win", "wins", "won", "open", "opens",
    "opened", "close", "closes", "closed", "buy", "buys", "bought",
    "send", "sends", "sent", "stay", "stays", "stayed", "fall",
    "falls", "fell", "cut", "cuts", "reach", "reached", "remain",
    "remains", "remained", "wait", "waits", "waited", "serve",
    "served", "sing", "sang", "dance", "danced", "smile", "smiled",
    "laugh", "laughed", "cry", "cried", "jump", "jumped", "swim",
    "swam", "fly", "flew", "drive", "drove", "ride", "rode", "type",
    "types", "typed", "tap", "taps", "tapped", "swipe", "swipes",
    "swiped", "press", "pressed", "wish", "wished", "hope", "hoped",
    "carry", "carried", "cook", "cooked", "clean", "cleaned", "wash",
    "washed", "build", "built", "break", "broke", "broken", "fix",
    "fixed", "visit", "visited", "miss", "missed", "love", "loved",
    "like", "liked", "hate", "hated", "choose", "chose", "decide",
    "decided", "remember", "remembered", "forget", "forgot", "agree",
    "agreed", "answer", "answered", "arrive", "arrived", "travel",
    "traveled", "return", "returned", "explain", "explained",
)

NOUNS = (
    "time", "year", "day", "week", "month", "hour", "minute", "moment",
    "people", "person", "man", "woman", "child", "boy", "girl",
    "friend", "family", "mother", "father", "brother", "sister", "son",
    "daughter", "world", "country", "city", "town", "place", "home",
    "house", "room", "door", "window", "wall", "floor", "table",
    "chair", "bed", "kitchen", "garden", "street", "road", "car",
    "train", "bus", "boat", "plane", "bike", "way", "end", "part",
    "side", "thing", "word", "name", "line", "sentence", "letter",
    "story", "book", "page", "paper", "pen", "pencil", "school",
    "class", "teacher", "student", "lesson", "question", "problem",
    "idea", "plan", "job", "business", "money", "price", "market",
    "store", "shop", "food", "water", "coffee", "tea", "milk", "bread",
    "butter", "cheese", "egg", "meat", "fish", "fruit", "apple",
    "orange", "banana", "rice", "soup", "dinner", "lunch", "breakfast",
    "morning", "evening", "night", "light", "sun", "moon", "star",
    "sky", "cloud", "rain", "snow", "wind", "storm", "weather",
    "summer", "winter", "spring", "autumn", "season", "fire", "ice",
    "earth", "ground", "field", "tree", "flower", "grass", "leaf",
    "mountain", "river", "lake", "sea", "beach", "island", "forest",
    "animal", "dog", "cat", "bird", "horse", "cow", "sheep", "mouse",
    "hand", "head", "eye", "ear", "nose", "mouth", "face", "hair",
    "arm", "leg", "foot", "heart", "mind", "body", "voice", "music",
    "song", "sound", "game", "sport", "ball", "team", "player",
    "match", "number", "art", "color", "picture", "film", "movie",
    "news", "phone", "computer", "keyboard", "screen", "key", "board",
    "message", "mail", "group", "meeting", "party", "luck", "chance",
    "dream", "life", "health", "doctor", "nurse", "hospital", "office",
    "company", "hat", "coat", "shirt", "shoe", "dress", "pocket",
    "bag", "box", "cup", "glass", "plate", "knife", "fork", "spoon",
    "bottle", "clock", "war", "peace", "law", "rule", "government",
    "president", "king", "queen", "power", "state", "nation",
    "history", "science", "nature", "truth", "fact", "reason",
    "result", "effect", "cause", "case", "matter", "kind", "sort",
    "form", "level", "order", "rate", "degree", "fahrenheit", "pit",
    "pot", "lot", "bit", "piece", "corner", "middle", "center",
    "distance", "subject", "report", "course", "test", "example",
    "list", "note", "card", "gift", "toy", "tool", "machine", "engine",
    "wheel", "bridge", "station", "airport", "hotel", "church",
    "castle", "farm", "village", "desert", "valley", "hill", "stone",
    "rock", "sand", "gold", "silver", "iron", "glass", "wood",
)

ADJECTIVES = (
    "good", "bad", "great", "small", "little", "big", "large", "long",
    "short", "high", "low", "old", "new", "young", "right", "wrong",
    "same", "different", "next", "last", "first", "second", "third",
    "few", "many", "much", "more", "most", "less", "least", "own",
    "other", "whole", "half", "free", "full", "empty", "hot", "cold",
    "warm", "cool", "fast", "slow", "quick", "hard", "soft", "easy",
    "difficult", "heavy", "strong", "weak", "rich", "poor", "happy",
    "sad", "angry", "afraid", "proud", "quiet", "loud", "dirty",
    "dry", "wet", "dark", "bright", "clear", "deep", "wide", "narrow",
    "thick", "thin", "tall", "pretty", "beautiful", "nice", "kind",
    "funny", "serious", "important", "famous", "popular", "ready",
    "busy", "tired", "hungry", "thirsty", "sick", "healthy", "safe",
    "dangerous", "true", "false", "real", "possible", "certain",
    "sure", "simple", "fine", "fair", "cheap", "expensive", "distant",
    "local", "public", "private", "common", "rare", "fresh", "sweet",
    "sour", "bitter", "salty", "delicious", "terrible", "wonderful",
    "amazing", "perfect", "exact", "correct", "fat",
)

CONTRACTIONS = (
    "you're", "i'm", "it's", "don't", "can't", "isn't", "didn't",
    "that's", "we're", "they're", "i've", "you've", "he's", "she's",
    "won't", "wasn't", "couldn't", "wouldn't", "let's", "there's",
)

# frequent multiword collocations, sampled whole so the model learns them
PHRASES = (
    ("good", "luck"), ("a", "whole", "lot"), ("by", "the", "way"),
    ("of", "course"), ("at", "home"), ("last", "night"),
    ("next", "week"), ("you're", "welcome"), ("thank", "you"),
    ("a", "little", "bit"), ("right", "now"), ("every", "day"),
    ("at", "the", "moment"), ("in", "the", "morning"),
    ("all", "the", "time"), ("it", "meant", "a", "whole", "lot"),
    ("a", "while", "ago"), ("for", "a", "while"), ("come", "on"),
    ("over", "there"), ("far", "away"), ("food", "and", "water"),
)

EXTRAS = ("yes", "no", "please", "sorry", "hello", "goodbye", "welcome",
          "ago", "else", "both", "all", "none", "several", "ok",
          "truly",)

VOCABULARY: tuple[str, ...] = tuple(sorted(
    set(DETERMINERS) | set(PRONOUNS) | set(AUXILIARIES)
    | set(CONNECTIVES) | set(ADVERBS) | set(VERBS) | set(NOUNS)
    | set(ADJECTIVES) | set(CONTRACTIONS) | set(EXTRAS)
    | {w for p in PHRASES for w in p}))

ALPHABET = "abcdefghijklmnopqrstuvwxyz'"

TEMPLATES = (
    (DETERMINERS, NOUNS, AUXILIARIES, ADJECTIVES),
    (DETERMINERS, ADJECTIVES, NOUNS, VERBS, ADVERBS),
    (PRONOUNS, VERBS, DETERMINERS, NOUNS),
    (PRONOUNS, AUXILIARIES, VERBS, DETERMINERS, NOUNS),
    (PRONOUNS, VERBS, CONNECTIVES, DETERMINERS, NOUNS),
    (DETERMINERS, NOUNS, VERBS, DETERMINERS, ADJECTIVES, NOUNS),
    (PRONOUNS, AUXILIARIES, ADVERBS, VERBS),
    (NOUNS, CONNECTIVES, NOUNS),
    (PRONOUNS, VERBS, ADVERBS),
    (CONTRACTIONS, ADVERBS, ADJECTIVES),
    (ADVERBS, PRONOUNS, VERBS, DETERMINERS, NOUNS),
    (DETERMINERS, NOUNS, CONNECTIVES, DETERMINERS, NOUNS, AUXILIARIES,
     ADJECTIVES),
)


def sample_sentence(rng: random.Random) -> list[str]:
    """One sentence: a filled template, sometimes with a stock phrase."""
    words: list[str] = []
    if rng.random() < 0.25:
        words.extend(rng.choice(PHRASES))
    if not words or rng.random() < 0.8:
        for slot in rng.choice(TEMPLATES):
            words.append(rng.choice(slot))
    if rng.random() < 0.15:
        words.extend(rng.choice(PHRASES))
    return words


def sample_corpus(n: int, seed: int) -> list[list[str]]:
    rng = random.Random(seed)
    return [sample_sentence(rng) for _ in range(n)]


def training_corpus(n: int = 3000, seed: int = 7) -> list[list[str]]:
    return sample_corpus(n, seed)


def eval_corpus(n: int = 200, seed: int = 42) -> list[list[str]]:
    return sample_corpus(n, seed)


_ONSETS = ("b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p",
           "r", "s", "t", "v", "w", "z", "br", "ch", "cl", "cr", "dr",
           "fl", "fr", "gl", "gr", "pl", "pr", "sh", "sk", "sl", "sm",
           "sn", "sp", "st", "str", "sw", "th", "tr", "wh")
_VOWELS = ("a", "e", "i", "o", "u", "ai", "ea", "ee", "io", "oa", "oo",
           "ou")
_CODAS = ("", "b", "ck", "d", "ft", "g", "k", "l", "ll", "m", "n",
          "nd", "ng", "nt", "p", "r", "rd", "rn", "s", "sh", "ss",
          "st", "t", "th", "x")


def pseudo_words(count: int, seed: int = 0,
                 taken: Sequence[str] = ()) -> list[str]:
    """Deterministic pronounceable filler words, disjoint from ``taken``."""
    rng = random.Random(seed)
    seen = set(taken)
    out: list[str] = []
    while len(out) < count:
        n_syll = rng.choice((2, 2, 3))
        word = "".join(rng.choice(_ONSETS) + rng.choice(_VOWELS)
                       + (rng.choice(_CODAS) if i == n_syll - 1 else "")
                       for i in range(n_syll))
        if word not in seen and 4 <= len(word) <= 12:
            seen.add(word)
            out.append(word)
    return out


def big_lexicon(size: int = 10000, seed: int = 0) -> list[str]:
    """The bundled vocabulary padded with filler words to ``size``."""
    if size <= len(VOCABULARY):
        return list(VOCABULARY[:size])
    fill = pseudo_words(size - len(VOCABULARY), seed, taken=VOCABULARY)
    return sorted(set(VOCABULARY) | set(fill))
