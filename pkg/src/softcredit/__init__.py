"""Research-software credit pipeline.

Links articles to code repositories, matches authors to developer
accounts, and runs team-composition / citation / h-index analyses on
the resulting graph.
"""

__version__ = "0.1.0"
