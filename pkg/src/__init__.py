# rtkit - SEIR-based reproduction number estimation and mobility analysis
__version__ = "0.3.0"
