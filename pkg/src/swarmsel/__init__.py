"""Texture-descriptor feature selection pipeline.

Grayscale preprocessing, 256-bin local phase quantization features, wrapper
feature selection by a bees algorithm and PSO (plus PCA and lasso baselines),
four classifiers, and stratified cross-validated evaluation.
"""

__version__ = "0.1.0"
