"""scikit-learn style front end: fit on (income, type label) micro-data."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_incomes, check_theta, check_type_labels, check_weights
from .indices import inequality_report
from .persist import Binning, MicroRecord, ingest_microdata
from .utility import UtilitySpec, parse_utility
from .welfare import optimal_weights, welfare_primal


def _utility(spec) -> UtilitySpec:
    return spec if isinstance(spec, UtilitySpec) else parse_utility(spec)


class OpportunityWelfare(TransformerMixin, BaseEstimator):
    """Evaluate a population described by individual incomes and type labels.

    Parameters
    ----------
    theta : float or "inf", default=0.0
        Aversion to inequality of opportunity.
    utility : str or UtilitySpec, default="log"
        ``"log"``, ``"power:<sigma>"`` or a utility object.
    binning : str, default="exact"
        ``"exact"`` or ``"quantile:<k>"``.

    Attributes
    ----------
    society_ : Society
    welfare_ : float
    edei_ : float
    weights_ : ndarray of shape (n_types,)
        Normative type weights, ordered as ``types_``.
    types_ : ndarray of str
    report_ : InequalityReport
    """

    def __init__(self, theta=0.0, utility="log", binning="exact"):
        self.theta = theta
        self.utility = utility
        self.binning = binning

    def _society(self, X, y, sample_weight):
        incomes = check_incomes(X)
        labels = check_type_labels(y, len(incomes))
        weights = check_weights(sample_weight, len(incomes))
        records = (MicroRecord(lab, float(v), float(w)) for lab, v, w in zip(labels, incomes, weights))
        return ingest_microdata(records, Binning.parse(self.binning))

    def fit(self, X, y, sample_weight=None):
        theta = check_theta(self.theta)
        u = _utility(self.utility)
        self.society_ = self._society(X, y, sample_weight)
        self.welfare_ = welfare_primal(self.society_, u, theta)
        self.edei_ = u.inverse(self.welfare_)
        w = optimal_weights(self.society_, u, theta)
        self.types_ = np.array(w.labels, dtype=object)
        self.weights_ = w.array
        self.report_ = inequality_report(self.society_, u, theta)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        """Utility of each income under the configured utility."""
        check_is_fitted(self, "society_")
        return _utility(self.utility)(check_incomes(X)).reshape(-1, 1)

    def score(self, X, y, sample_weight=None):
        """Welfare of the population given by ``X`` and ``y``."""
        check_is_fitted(self, "society_")
        society = self._society(X, y, sample_weight)
        return welfare_primal(society, _utility(self.utility), check_theta(self.theta))
