# Анализатор спектральной устойчивости волн mcGL
__version__ = "0.1.0"
