"""Investor discovery: catalog model, filters, search and ordering."""

from .catalog import (FUNDING_STAGES, INDUSTRIES, Catalog, CompanyRecord, FirmRecord, InvestorRecord,
                      load_catalog, save_catalog)
from .engine import (FilterQuery, FounderContext, associate_topics, best_partner_match, covering_industries,
                     filter_and_search, hub_cities, infer_point_partner, infer_stages, rank_firms)
from .importer import guess_column_mapping, levenshtein

__all__ = [
    "FUNDING_STAGES", "INDUSTRIES", "Catalog", "CompanyRecord", "FirmRecord", "InvestorRecord",
    "load_catalog", "save_catalog", "FilterQuery", "FounderContext", "associate_topics",
    "best_partner_match", "covering_industries", "filter_and_search", "hub_cities",
    "infer_point_partner", "infer_stages", "rank_firms", "guess_column_mapping", "levenshtein",
]
