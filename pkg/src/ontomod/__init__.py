"""Build a topic ontology from modules of several source ontologies."""

__version__ = "0.1.0"
