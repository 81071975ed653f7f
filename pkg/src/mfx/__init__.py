"""MinXQuery to macro forest transducer compilation and streaming execution.

The package is organised around one value domain and one machine model:

* :mod:`mfx.forest` -- immutable XML forests, term notation, and the
  first-child/next-sibling binary view used by the composition laws.
* :mod:`mfx.xmlio` -- the event boundary between concrete XML bytes and
  forests (a small start/text/end event vocabulary).
* :mod:`mfx.mft` -- macro forest transducers: representation, validation,
  in-memory evaluation (the oracle), classification, and rule-file syntax.
* :mod:`mfx.xquery` -- the MinXQuery front end (parser, scope checker).
* :mod:`mfx.paths` -- XPath steps compiled to total node-selection automata,
  plus the naive selection oracle.
* :mod:`mfx.xqeval` -- a direct MinXQuery interpreter (reference semantics).
* :mod:`mfx.compile` -- the query-to-transducer translation.
* :mod:`mfx.optimize` -- parameter reduction, stay-move inlining, and
  unreachable-state removal, iterated to a fixpoint.
* :mod:`mfx.compose` -- transducer (de)compositions and pipeline fusion.
* :mod:`mfx.stream` -- single-pass evaluation over an XML event stream.
* :mod:`mfx.gen`, :mod:`mfx.bench`, :mod:`mfx.cli` -- document generator,
  benchmark harness, and the command-line front end.
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
