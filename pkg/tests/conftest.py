import hypothesis.strategies as st
from fractions import Fraction
from hypothesis import settings

from fusionlab.scalars import ParamScalar

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

small_rationals = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 5))


@st.composite
def param_scalars(draw, max_terms=4):
    terms = draw(st.dictionaries(st.integers(-4, 4), small_rationals, max_size=max_terms))
    return ParamScalar(terms)
