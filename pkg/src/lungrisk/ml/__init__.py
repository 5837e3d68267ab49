"""From-scratch classifiers: CART, random forest, PCA, linear SVM, K-means."""

from .forest import ForestModel, fit_forest
from .kmeans import KMeansModel, apply_mapping, fit_kmeans, map_clusters
from .pca import PcaModel, fit_pca, jacobi_eigh
from .split import SplitResult, split
from .svm import SvmModel, fit_svm, hinge_objective
from .tree import Node, TreeModel, fit_tree, gini, predict_tree

__all__ = [
    "ForestModel", "KMeansModel", "Node", "PcaModel", "SplitResult", "SvmModel", "TreeModel",
    "apply_mapping", "fit_forest", "fit_kmeans", "fit_pca", "fit_svm", "fit_tree", "gini",
    "hinge_objective", "jacobi_eigh", "map_clusters", "predict_tree", "split",
]
