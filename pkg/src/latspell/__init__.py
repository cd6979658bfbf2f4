"""Chinese spelling error detection with a fusion-lattice LSTM-CRF tagger."""

__version__ = "0.1.0"
