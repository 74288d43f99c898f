"""Fine-grained AST change mining and change-pattern instance detection for Java histories."""

__version__ = "0.1.0"
