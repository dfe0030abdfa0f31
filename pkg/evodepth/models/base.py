import os
import json


class BaseModel:
    """Base class for JSON file-backed models"""

    def to_dict(self):
        raise NotImplementedError

    @classmethod
    def from_dict(cls, data):
        raise NotImplementedError

    def to_json(self):
        """Serialize to a stable JSON string (sorted keys, full float precision)"""
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def save(self, file_path):
        """Save model to a JSON file, creating parent directories if needed"""
        directory = os.path.dirname(os.path.abspath(file_path))
        os.makedirs(directory, exist_ok=True)
        with open(file_path, 'w', encoding='utf-8') as f:
            f.write(self.to_json())
            f.write('\n')
        return self

    @classmethod
    def load(cls, file_path):
        """Load instance from a JSON file"""
        with open(file_path, 'r', encoding='utf-8') as f:
            data = json.load(f)
        return cls.from_dict(data)
