import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mfx.mft import parse_mft
from mfx.xmlio import bytes_to_forest

# The worked example: selects text of name-children of person nodes that
# have a p_id child with text content person0.
M_PERSON_TEXT = """\
# sigma: person p_id person0 name
q0(%) -> out(q1(x0))
q1(person(x1)x2) -> q2(x1, q4(x1)) q1(x2)
q1(%t(x1)x2) -> q1(x1) q1(x2)
q1(eps) -> eps
q2(p_id(x1)x2, y1) -> q3(x1, y1, q2(x2, y1))
q2(%t(x1)x2, y1) -> q2(x2, y1)
q2(eps, y1) -> eps
q3(person0(x1)x2, y1, y2) -> y1
q3(%t(x1)x2, y1, y2) -> q3(x2, y1, y2)
q3(eps, y1, y2) -> y2
q4(name(x1)x2) -> q5(x1) q4(x2)
q4(%t(x1)x2) -> q4(x2)
q4(eps) -> eps
q5(%text(x1)x2) -> %t() q5(x2)
q5(%t(x1)x2) -> q5(x2)
q5(eps) -> eps
"""

P_PERSON_TEXT = """\
<out>{ for $b in
       $input/person[./p_id/text() = "person0"]
       return let $r := $b/name/text()
       return $r }</out>"""

DOC1 = b"<person><p_id><a/>person0</p_id><name>Jim</name><c/><name>Li</name></person>"

# the filter-fallback variant: the first p_id fails, a later one succeeds
DOC2 = (b"<person><p_id><a/>perso7</p_id><name>Jim</name><c/>"
        b"<name>Li</name><p_id>person0</p_id></person>")

# the fallback variant exactly as printed (loses the second name): the
# filter still succeeds through the second p_id, but only Jim remains
DOC2_VERBATIM = (b"<person><p_id><a/>perso7</p_id><name>Jim</name><c/>"
                 b"<p_id>person0</p_id></person>")

NESTED_PROGRAM = """\
for $v1 in $input/descendant::a return
  for $v2 in $v1/descendant::b return
    let $v3 := $v2/descendant::c return
    let $v4 := $v2/descendant::d return
    ($v1,$v2,$v3,$v4)"""

NESTED_DOC = b"<doc><a><b><c><c/></c><d/><d/></b><b><d/></b></a></doc>"


@pytest.fixture(scope="session")
def m_person():
    return parse_mft(M_PERSON_TEXT)


@pytest.fixture(scope="session")
def doc1():
    return bytes_to_forest(DOC1)


@pytest.fixture(scope="session")
def doc2():
    return bytes_to_forest(DOC2)
