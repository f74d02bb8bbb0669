import pytest

from parcube import CubeSchema, build_cube, load_facts, validate

# The six-row fixture used across the suite: geo has a two-level hierarchy,
# product and quarter are flat. Column sum of sales is 210.
F6_SCHEMA_DOC = {
    "dimensions": [
        {
            "name": "geo",
            "levels": ["city", "country"],
            "members": {"city": ["NYC", "SFO", "BER"], "country": ["US", "DE"]},
            "parents": {"city": {"NYC": "US", "SFO": "US", "BER": "DE"}},
        },
        {"name": "product", "levels": ["product"], "members": {"product": ["A", "B"]}},
        {"name": "quarter", "levels": ["quarter"], "members": {"quarter": ["Q1", "Q2"]}},
    ],
    "measures": [{"name": "sales", "kind": "integer"}],
}

F6_ROWS = [
    ("NYC", "A", "Q1", 10),
    ("NYC", "B", "Q1", 20),
    ("SFO", "A", "Q2", 30),
    ("BER", "A", "Q1", 40),
    ("BER", "B", "Q2", 50),
    ("SFO", "B", "Q2", 60),
]

F6_CSV = "geo,product,quarter,sales\n" + "\n".join(
    ",".join(str(c) for c in row) for row in F6_ROWS
) + "\n"

F6_ROW_DICTS = [
    {"geo": g, "product": p, "quarter": q, "sales": s} for g, p, q, s in F6_ROWS
]


@pytest.fixture
def f6_schema_doc():
    return F6_SCHEMA_DOC


@pytest.fixture
def f6_csv():
    return F6_CSV


@pytest.fixture
def f6_schema():
    return CubeSchema.from_dict(F6_SCHEMA_DOC)


@pytest.fixture
def f6_facts(f6_schema):
    facts = load_facts(F6_CSV.encode(), f6_schema)
    assert validate(facts).ok
    return facts


@pytest.fixture
def f6_cube(f6_facts):
    return build_cube(f6_facts, {"sales": "sum"})
