"""cdrlab: call-detail-record analytics.

Ingests CDR datasets, detects anomalous activity with k-means clustering
and a zero-activity rule, prepares anomaly-free series, quantifies the
training impact of anomalies with a small feed-forward network, and
forecasts future activity with an ARIMA pipeline built from first
principles (ADF stationarity test, ACF/PACF order selection, CSS fit).
"""

__version__ = "0.1.0"
