import random
from fractions import Fraction

from hypothesis import strategies as st

from markovdyn.mcg import random_loxodromic_word, reduce

letters = st.sampled_from("xyz")


@st.composite
def words(draw, max_len=10):
    return reduce(draw(st.lists(letters, max_size=max_len)))


def loxodromic_words(max_len=8):
    """Seeded rejection sampling; hypothesis shrinks the seed."""
    return st.integers(0, 2 ** 32 - 1).map(lambda s: random_loxodromic_word(random.Random(s), max_len))


small_fractions = st.fractions(min_value=-6, max_value=6, max_denominator=5)


@st.composite
def rational_triples(draw):
    return tuple(Fraction(draw(small_fractions)) for _ in range(3))
