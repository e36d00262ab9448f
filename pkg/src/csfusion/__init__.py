"""csfusion: desk-scale code-switching ASR fusion toolkit.

Stages: synthetic corpus generation, language-aware masking, text
simulation, monolingual-recognizer emulation, a trainable bilingual
fusion model, and mixed error rate scoring.
"""

__version__ = "0.1.0"
