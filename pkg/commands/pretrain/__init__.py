# Export setup function for the command loader
from .command import setup
