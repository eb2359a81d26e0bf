import pytest

FIGURE_SRT = (
    "164\n"
    "00:08:57,020 --> 00:08:58,476 164\n"
    "I wanted to challenge the idea\n"
    "\n"
    "165\n"
    "00:08:58,500 --> 00:09:02,060\n"
    "that design is but a tool\n"
    "to create function and beauty.\n"
    "\n"
)

FIGURE_SENTENCE = (
    "I wanted to challenge the idea that design is but a tool "
    "to create function and beauty."
)

FIGURE_ANNOTATED = (
    "I wanted to challenge the idea <eob> that design is but a tool <eol> "
    "to create function and beauty. <eob>"
)


@pytest.fixture
def figure_srt():
    return FIGURE_SRT


@pytest.fixture
def figure_sentence():
    return FIGURE_SENTENCE


@pytest.fixture
def figure_annotated():
    return FIGURE_ANNOTATED
