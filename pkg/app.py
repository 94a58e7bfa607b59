"""
Experiment API
Main Flask application entry point.
"""
import os
from flask import Flask

from config import config


def create_app(config_name: str = None) -> Flask:
    """
    Application factory pattern.
    Creates and configures the Flask application.

    Args:
        config_name: Configuration to use (development, testing, production)
                     Defaults to FLASK_ENV environment variable or 'development'

    Returns:
        Configured Flask application instance
    """
    # Create Flask app
    flask_app = Flask(__name__)

    # Load configuration
    if config_name is None:
        config_name = os.environ.get('FLASK_ENV', 'development')

    flask_app.config.from_object(config[config_name])
    flask_app.logger.setLevel(flask_app.config['LOG_LEVEL'])

    # Register blueprints (API routes)
    from api.experiments import experiments_bp
    flask_app.register_blueprint(experiments_bp, url_prefix='/api')

    @flask_app.route('/health')
    def health():
        """Health check with the output directory status."""
        output_dir = flask_app.config['OUTPUT_DIR']
        return {
            'status': 'ok',
            'environment': config_name,
            'output_dir': output_dir,
            'output_dir_exists': os.path.isdir(output_dir),
        }

    return flask_app


if __name__ == '__main__':
    # Run the development server
    create_app().run(
        host='0.0.0.0',
        port=5000,
        debug=True
    )
