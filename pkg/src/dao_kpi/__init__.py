"""On-chain DAO governance sustainability KPIs: retrieval, decoding, harmonisation, scoring and reporting."""

__version__ = '0.1.0'
